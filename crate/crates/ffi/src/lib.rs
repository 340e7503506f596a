//! C bindings for the two-atom cavity toolkit.
//!
//! The API hands out opaque heap-allocated handles through out-pointers. A
//! handle stays owned by the caller until it is passed to the matching
//! `*_free`, which tolerates null. Every other pointer argument must be valid
//! for the duration of the call; null is rejected with
//! `CD_STATUS_NULL_ARGUMENT` instead of being dereferenced, and on any status
//! other than `CD_STATUS_OK` the out-pointers are left untouched. Scalar
//! getters signal a null handle in-band (zero for counts, NaN for floats).
//! Handles are plain data with no interior locking; share them across threads
//! only behind external synchronization.

use std::os::raw::c_char;

use cavity_dark::dark::{decay_rate_estimate, DarkBasisState, DarkTable, ExactDarkState};
use cavity_dark::dynamics::DynamicsError;
use cavity_dark::{propagate_two_atom, Channel, Model, Params, Trajectory, TwoAtomState};

/// Call outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    NumericalFailure = 3,
}

/// Excitation channel of a two-atom amplitude.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdChannel {
    /// Atom 1 excited, no photon.
    ExcGnd = 0,
    /// Atom 2 excited, no photon.
    GndExc = 1,
    /// Both atoms in the ground state, one cavity photon.
    Photon = 2,
}

/// Whether the kinetic (recoil) term is kept in the evolution.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdModel {
    Full = 0,
    NoRecoil = 1,
}

pub struct CdParams(Params);
pub struct CdState(TwoAtomState);
pub struct CdTrajectory(Trajectory<TwoAtomState>);
pub struct CdDarkTable(DarkTable);

impl CdChannel {
    fn into_core(self) -> Channel {
        match self {
            CdChannel::ExcGnd => Channel::ExcGnd,
            CdChannel::GndExc => Channel::GndExc,
            CdChannel::Photon => Channel::Photon,
        }
    }
}

impl CdModel {
    fn into_core(self) -> Model {
        match self {
            CdModel::Full => Model::Full,
            CdModel::NoRecoil => Model::Rna,
        }
    }
}

fn leak<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Static description of a status code; never null.
#[no_mangle]
pub extern "C" fn cd_status_message(status: CdStatus) -> *const c_char {
    let msg = match status {
        CdStatus::Ok => c"ok",
        CdStatus::NullArgument => c"null pointer argument",
        CdStatus::InvalidArgument => c"argument out of range",
        CdStatus::NumericalFailure => c"integration failed or window overflowed",
    };
    msg.as_ptr()
}

/// Dimensionless system parameters: coupling `omega` (> 0), photon damping
/// `kappa` (>= 0), detuning `delta`, quasimomenta `q1`, `q2` in [0, 1), and
/// drive phase `phi`.
#[no_mangle]
pub unsafe extern "C" fn cd_params_new(
    omega: f64,
    kappa: f64,
    delta: f64,
    q1: f64,
    q2: f64,
    phi: f64,
    out: *mut *mut CdParams,
) -> CdStatus {
    if out.is_null() {
        return CdStatus::NullArgument;
    }
    match Params::new(omega, kappa, delta, q1, q2, phi) {
        Ok(p) => {
            *out = leak(CdParams(p));
            CdStatus::Ok
        }
        Err(_) => CdStatus::InvalidArgument,
    }
}

#[no_mangle]
pub unsafe extern "C" fn cd_params_free(params: *mut CdParams) {
    release(params);
}

/// Unit excitation of atom 1 at zero momentum on the window |m|, |n| <= m_max.
#[no_mangle]
pub unsafe extern "C" fn cd_state_delta(m_max: u32, out: *mut *mut CdState) -> CdStatus {
    if out.is_null() {
        return CdStatus::NullArgument;
    }
    match TwoAtomState::delta_initial(m_max as usize) {
        Ok(s) => {
            *out = leak(CdState(s));
            CdStatus::Ok
        }
        Err(_) => CdStatus::InvalidArgument,
    }
}

/// Normalized four-site dark superposition centered at (m, n). Fails when the
/// window cannot hold all four sites.
#[no_mangle]
pub unsafe extern "C" fn cd_state_dark_basis(
    m: i32,
    n: i32,
    m_max: u32,
    out: *mut *mut CdState,
) -> CdStatus {
    if out.is_null() {
        return CdStatus::NullArgument;
    }
    match DarkBasisState::new(m, n).to_state(m_max as usize) {
        Ok(s) => {
            *out = leak(CdState(s));
            CdStatus::Ok
        }
        Err(_) => CdStatus::InvalidArgument,
    }
}

/// Closed-form stationary dark state; `level` selects 1 or 2.
#[no_mangle]
pub unsafe extern "C" fn cd_state_exact_dark(
    level: u32,
    m_max: u32,
    out: *mut *mut CdState,
) -> CdStatus {
    if out.is_null() {
        return CdStatus::NullArgument;
    }
    let which = match level {
        1 => ExactDarkState::D1,
        2 => ExactDarkState::D2,
        _ => return CdStatus::InvalidArgument,
    };
    match which.to_state(m_max as usize) {
        Ok(s) => {
            *out = leak(CdState(s));
            CdStatus::Ok
        }
        Err(_) => CdStatus::InvalidArgument,
    }
}

#[no_mangle]
pub unsafe extern "C" fn cd_state_m_max(state: *const CdState) -> u32 {
    if state.is_null() {
        return 0;
    }
    (*state).0.m_max() as u32
}

#[no_mangle]
pub unsafe extern "C" fn cd_state_time(state: *const CdState) -> f64 {
    if state.is_null() {
        return f64::NAN;
    }
    (*state).0.time
}

/// Total excitation probability held by the state.
#[no_mangle]
pub unsafe extern "C" fn cd_state_survival(state: *const CdState) -> f64 {
    if state.is_null() {
        return f64::NAN;
    }
    (*state).0.survival_probability()
}

/// Complex amplitude at one lattice site; (m, n) must lie inside the window.
#[no_mangle]
pub unsafe extern "C" fn cd_state_amplitude(
    state: *const CdState,
    channel: CdChannel,
    m: i32,
    n: i32,
    re: *mut f64,
    im: *mut f64,
) -> CdStatus {
    if state.is_null() || re.is_null() || im.is_null() {
        return CdStatus::NullArgument;
    }
    let s = &(*state).0;
    if !s.contains(m, n) {
        return CdStatus::InvalidArgument;
    }
    let a = s.amp(channel.into_core(), m, n);
    *re = a.re;
    *im = a.im;
    CdStatus::Ok
}

#[no_mangle]
pub unsafe extern "C" fn cd_state_free(state: *mut CdState) {
    release(state);
}

/// Integrates the lattice equations from `initial` and records one sample per
/// entry of `times`, which must hold `n_times` non-decreasing instants not
/// earlier than the state's own time. `tol` is the adaptive step error bound.
#[no_mangle]
pub unsafe extern "C" fn cd_propagate(
    params: *const CdParams,
    model: CdModel,
    initial: *const CdState,
    times: *const f64,
    n_times: usize,
    tol: f64,
    out: *mut *mut CdTrajectory,
) -> CdStatus {
    if params.is_null() || initial.is_null() || times.is_null() || out.is_null() {
        return CdStatus::NullArgument;
    }
    if n_times == 0 || !(tol > 0.0) {
        return CdStatus::InvalidArgument;
    }
    let ts = std::slice::from_raw_parts(times, n_times);
    match propagate_two_atom(&(*params).0, model.into_core(), &(*initial).0, ts, tol) {
        Ok(t) => {
            *out = leak(CdTrajectory(t));
            CdStatus::Ok
        }
        Err(DynamicsError::InvalidSampleTimes) => CdStatus::InvalidArgument,
        Err(_) => CdStatus::NumericalFailure,
    }
}

#[no_mangle]
pub unsafe extern "C" fn cd_trajectory_len(traj: *const CdTrajectory) -> usize {
    if traj.is_null() {
        return 0;
    }
    (*traj).0.samples.len()
}

/// Survival probability of sample `index`.
#[no_mangle]
pub unsafe extern "C" fn cd_trajectory_survival(
    traj: *const CdTrajectory,
    index: usize,
    out: *mut f64,
) -> CdStatus {
    if traj.is_null() || out.is_null() {
        return CdStatus::NullArgument;
    }
    let samples = &(*traj).0.samples;
    match samples.get(index) {
        Some(s) => {
            *out = s.survival_probability();
            CdStatus::Ok
        }
        None => CdStatus::InvalidArgument,
    }
}

/// Copies sample `index` into a fresh state handle.
#[no_mangle]
pub unsafe extern "C" fn cd_trajectory_state(
    traj: *const CdTrajectory,
    index: usize,
    out: *mut *mut CdState,
) -> CdStatus {
    if traj.is_null() || out.is_null() {
        return CdStatus::NullArgument;
    }
    let samples = &(*traj).0.samples;
    match samples.get(index) {
        Some(s) => {
            *out = leak(CdState(s.clone()));
            CdStatus::Ok
        }
        None => CdStatus::InvalidArgument,
    }
}

/// Largest population seen on the outermost momentum shell; the truncation
/// monitor for the run.
#[no_mangle]
pub unsafe extern "C" fn cd_trajectory_max_boundary(traj: *const CdTrajectory) -> f64 {
    if traj.is_null() {
        return f64::NAN;
    }
    (*traj).0.meta.max_boundary_population
}

#[no_mangle]
pub unsafe extern "C" fn cd_trajectory_free(traj: *mut CdTrajectory) {
    release(traj);
}

/// Builds the quadrature table of stationary dark amplitudes out to
/// |m|, |n| <= m_max.
#[no_mangle]
pub unsafe extern "C" fn cd_dark_table_new(m_max: u32, out: *mut *mut CdDarkTable) -> CdStatus {
    if out.is_null() {
        return CdStatus::NullArgument;
    }
    match DarkTable::build(m_max as usize) {
        Ok(t) => {
            *out = leak(CdDarkTable(t));
            CdStatus::Ok
        }
        Err(_) => CdStatus::InvalidArgument,
    }
}

/// Tabulated amplitude at (m, n); exact zero off the parity classes or outside
/// the table window. Null handle gives NaN.
#[no_mangle]
pub unsafe extern "C" fn cd_dark_table_amplitude(
    table: *const CdDarkTable,
    channel: CdChannel,
    m: i32,
    n: i32,
) -> f64 {
    if table.is_null() {
        return f64::NAN;
    }
    (*table).0.amplitude(channel.into_core(), m, n)
}

/// Σ |c|² over the diamond |m| + |n| <= r.
#[no_mangle]
pub unsafe extern "C" fn cd_dark_table_diamond_weight(
    table: *const CdDarkTable,
    r: u32,
) -> f64 {
    if table.is_null() {
        return f64::NAN;
    }
    (*table).0.partial_norm_diamond(r as usize)
}

#[no_mangle]
pub unsafe extern "C" fn cd_dark_table_free(table: *mut CdDarkTable) {
    release(table);
}

/// Perturbative decay rate of the four-site dark superposition at (m, n).
/// `beyond_validity` is set nonzero when the damping is too strong for the
/// estimate to apply.
#[no_mangle]
pub unsafe extern "C" fn cd_decay_estimate(
    params: *const CdParams,
    m: i32,
    n: i32,
    rate: *mut f64,
    beyond_validity: *mut i32,
) -> CdStatus {
    if params.is_null() || rate.is_null() || beyond_validity.is_null() {
        return CdStatus::NullArgument;
    }
    let est = decay_rate_estimate(&DarkBasisState::new(m, n), &(*params).0);
    *rate = est.rate;
    *beyond_validity = est.beyond_validity as i32;
    CdStatus::Ok
}
