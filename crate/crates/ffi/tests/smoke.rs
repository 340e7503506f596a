//! Drives the C entry points end to end from Rust: a damped decay run, the
//! amplitude table, the lifetime estimate, and the error paths that C callers
//! rely on (null rejection, range checks, free-of-null).

use std::ptr;

use cavity_dark_ffi::*;

fn params(omega: f64, kappa: f64) -> *mut CdParams {
    let mut p = ptr::null_mut();
    let st = unsafe { cd_params_new(omega, kappa, 0.0, 0.0, 0.0, 0.0, &mut p) };
    assert_eq!(st, CdStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn decay_lifecycle_through_the_c_surface() {
    unsafe {
        let p = params(25.0, 20.0);
        let mut s = ptr::null_mut();
        assert_eq!(cd_state_dark_basis(0, 0, 12, &mut s), CdStatus::Ok);
        assert_eq!(cd_state_m_max(s), 12);
        assert!((cd_state_survival(s) - 1.0).abs() < 1e-12);

        let times = [0.0, 1.0, 2.0];
        let mut t = ptr::null_mut();
        let st = cd_propagate(p, CdModel::Full, s, times.as_ptr(), times.len(), 1e-8, &mut t);
        assert_eq!(st, CdStatus::Ok);
        assert_eq!(cd_trajectory_len(t), 3);

        let mut surv = [0.0; 3];
        for (i, v) in surv.iter_mut().enumerate() {
            assert_eq!(cd_trajectory_survival(t, i, v), CdStatus::Ok);
        }
        assert!((surv[0] - 1.0).abs() < 1e-9);
        assert!(surv[0] > surv[1] && surv[1] > surv[2]);
        assert!(surv[2] > 0.3 && surv[2] < 0.999);
        assert!(cd_trajectory_max_boundary(t) < 1e-3);

        // A sample handle agrees with the in-place accessor.
        let mut mid = ptr::null_mut();
        assert_eq!(cd_trajectory_state(t, 1, &mut mid), CdStatus::Ok);
        assert_eq!(cd_state_time(mid), 1.0);
        assert_eq!(cd_state_survival(mid), surv[1]);

        let (mut re, mut im) = (0.0, 0.0);
        let st = cd_state_amplitude(mid, CdChannel::ExcGnd, 0, 0, &mut re, &mut im);
        assert_eq!(st, CdStatus::Ok);
        assert!(re.hypot(im) > 0.1);

        cd_state_free(mid);
        cd_trajectory_free(t);
        cd_state_free(s);
        cd_params_free(p);
    }
}

#[test]
fn table_matches_the_frozen_central_amplitudes() {
    unsafe {
        let mut tbl = ptr::null_mut();
        assert_eq!(cd_dark_table_new(4, &mut tbl), CdStatus::Ok);

        assert_eq!(cd_dark_table_amplitude(tbl, CdChannel::ExcGnd, 0, 0), 0.5);
        let c2 = cd_dark_table_amplitude(tbl, CdChannel::GndExc, 1, 1);
        assert!((c2 - (1.0 / std::f64::consts::PI - 0.5)).abs() < 1e-12);
        // Reflection symmetry and the parity zeros come through unchanged.
        assert_eq!(cd_dark_table_amplitude(tbl, CdChannel::GndExc, -1, 1), c2);
        assert_eq!(cd_dark_table_amplitude(tbl, CdChannel::ExcGnd, 1, 0), 0.0);
        assert_eq!(cd_dark_table_amplitude(tbl, CdChannel::ExcGnd, 10, 0), 0.0);

        let inner = cd_dark_table_diamond_weight(tbl, 2);
        let outer = cd_dark_table_diamond_weight(tbl, 4);
        assert!(inner > 0.4 && inner < outer && outer < 0.5);

        cd_dark_table_free(tbl);
    }
}

#[test]
fn lifetime_estimate_scales_with_coupling_and_flags_strong_damping() {
    unsafe {
        let (mut rate, mut beyond) = (0.0, 0);
        let p = params(50.0, 20.0);
        assert_eq!(cd_decay_estimate(p, 0, 0, &mut rate, &mut beyond), CdStatus::Ok);
        assert!((rate - 0.032).abs() < 1e-12);
        assert_eq!(beyond, 0);
        cd_params_free(p);

        let p = params(25.0, 20.0);
        assert_eq!(cd_decay_estimate(p, 0, 0, &mut rate, &mut beyond), CdStatus::Ok);
        assert!((rate - 0.128).abs() < 1e-12);
        cd_params_free(p);

        let p = params(5.0, 20.0);
        assert_eq!(cd_decay_estimate(p, 0, 0, &mut rate, &mut beyond), CdStatus::Ok);
        assert_eq!(beyond, 1);
        cd_params_free(p);
    }
}

#[test]
fn null_and_range_errors_are_reported_not_dereferenced() {
    unsafe {
        assert_eq!(
            cd_params_new(25.0, 20.0, 0.0, 0.0, 0.0, 0.0, ptr::null_mut()),
            CdStatus::NullArgument
        );
        let mut p = ptr::null_mut();
        assert_eq!(
            cd_params_new(-1.0, 20.0, 0.0, 0.0, 0.0, 0.0, &mut p),
            CdStatus::InvalidArgument
        );
        assert!(p.is_null());

        assert_eq!(cd_state_m_max(ptr::null()), 0);
        assert!(cd_state_survival(ptr::null()).is_nan());
        assert!(cd_state_time(ptr::null()).is_nan());
        assert_eq!(cd_trajectory_len(ptr::null()), 0);
        assert!(cd_trajectory_max_boundary(ptr::null()).is_nan());
        assert!(cd_dark_table_amplitude(ptr::null(), CdChannel::Photon, 0, 0).is_nan());
        assert!(cd_dark_table_diamond_weight(ptr::null(), 2).is_nan());

        let mut s = ptr::null_mut();
        assert_eq!(cd_state_exact_dark(3, 8, &mut s), CdStatus::InvalidArgument);
        assert_eq!(cd_state_dark_basis(0, 0, 0, &mut s), CdStatus::InvalidArgument);
        assert_eq!(cd_state_delta(6, &mut s), CdStatus::Ok);

        let (mut re, mut im) = (0.0, 0.0);
        let st = cd_state_amplitude(s, CdChannel::ExcGnd, 7, 0, &mut re, &mut im);
        assert_eq!(st, CdStatus::InvalidArgument);
        let st = cd_state_amplitude(s, CdChannel::ExcGnd, 0, 0, ptr::null_mut(), &mut im);
        assert_eq!(st, CdStatus::NullArgument);

        let p = params(25.0, 20.0);
        let mut t = ptr::null_mut();
        let bad = [1.0, 0.5];
        let st = cd_propagate(p, CdModel::Full, s, bad.as_ptr(), 2, 1e-8, &mut t);
        assert_eq!(st, CdStatus::InvalidArgument);
        let st = cd_propagate(p, CdModel::Full, s, ptr::null(), 2, 1e-8, &mut t);
        assert_eq!(st, CdStatus::NullArgument);
        let good = [0.5];
        let st = cd_propagate(p, CdModel::NoRecoil, s, good.as_ptr(), 1, 0.0, &mut t);
        assert_eq!(st, CdStatus::InvalidArgument);
        assert!(t.is_null());

        let st = cd_propagate(p, CdModel::NoRecoil, s, good.as_ptr(), 1, 1e-9, &mut t);
        assert_eq!(st, CdStatus::Ok);
        let mut v = 0.0;
        assert_eq!(cd_trajectory_survival(t, 5, &mut v), CdStatus::InvalidArgument);
        let mut c = ptr::null_mut();
        assert_eq!(cd_trajectory_state(t, 5, &mut c), CdStatus::InvalidArgument);

        cd_trajectory_free(t);
        cd_state_free(s);
        cd_params_free(p);

        // Frees tolerate null, and every status renders a message.
        cd_params_free(ptr::null_mut());
        cd_state_free(ptr::null_mut());
        cd_trajectory_free(ptr::null_mut());
        cd_dark_table_free(ptr::null_mut());
        for st in [
            CdStatus::Ok,
            CdStatus::NullArgument,
            CdStatus::InvalidArgument,
            CdStatus::NumericalFailure,
        ] {
            let msg = cd_status_message(st);
            assert!(!msg.is_null());
            assert!(!std::ffi::CStr::from_ptr(msg).to_bytes().is_empty());
        }
    }
}

#[test]
fn committed_header_declares_the_surface() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/cavity_dark.h"
    ))
    .expect("header present");
    for needle in [
        "typedef struct CdTrajectory CdTrajectory;",
        "CD_STATUS_NUMERICAL_FAILURE",
        "CD_CHANNEL_PHOTON",
        "cd_propagate(",
        "cd_decay_estimate(",
        "cd_dark_table_diamond_weight(",
    ] {
        assert!(header.contains(needle), "header is missing {needle}");
    }
}
