//! Time evolution on the truncated momentum lattice.
//!
//! The equations of motion in recoil units couple each photon amplitude to
//! its momentum neighbors in the excited channels:
//!
//!   i dC1/dτ = ω̃ C1 + Ω (C3[m+1] + C3[m-1])
//!   i dC2/dτ = ω̃ C2 + Ω (C3[n+1] + C3[n-1])
//!   i dC3/dτ = (ω̃ + Δ' - iκ'/2) C3 + Ω (C1[m±1] + C2[n±1])
//!
//! with ω̃ = (q1+m)² + (q2+n)². Dropping ω̃ everywhere gives the
//! recoil-neglected model, which is diagonal in position and solvable; it is
//! kept as a separate [`Model`] variant rather than a limit Ω → ∞ so the two
//! can be compared at identical parameters.
//!
//! Amplitudes beyond the window are treated as zero, so results are only
//! trustworthy while the boundary population stays negligible; every
//! trajectory records the worst value seen and can be asked whether it
//! crossed the flagging threshold.

use ndarray::{s, Array2, Array3, ArrayView2, ArrayViewMut2, Axis, Zip};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::Params;
use crate::rk45::{Rk45, StepError};
use crate::state::{OneAtomState, TwoAtomState};

/// Boundary population above which a trajectory is flagged as truncated.
pub const BOUNDARY_FLAG_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Kinetic energy included.
    Full,
    /// Recoil-neglected: kinetic terms dropped, couplings kept.
    Rna,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Full => "full",
            Model::Rna => "rna",
        })
    }
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Model::Full),
            "rna" => Ok(Model::Rna),
            other => Err(format!("unknown model '{other}', expected 'full' or 'rna'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("sample times must be non-decreasing and start at or after the state time")]
    InvalidSampleTimes,
    #[error(
        "boundary population reached {max_boundary_population:.3e}; momentum window too small"
    )]
    Truncation { max_boundary_population: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub model: Model,
    pub tolerance: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    pub max_boundary_population: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub samples: Vec<S>,
    pub meta: TrajectoryMeta,
}

impl<S> Trajectory<S> {
    pub fn truncation_flagged(&self) -> bool {
        self.meta.max_boundary_population > BOUNDARY_FLAG_THRESHOLD
    }

    pub fn check_truncation(&self) -> Result<(), DynamicsError> {
        if self.truncation_flagged() {
            Err(DynamicsError::Truncation {
                max_boundary_population: self.meta.max_boundary_population,
            })
        } else {
            Ok(())
        }
    }

    pub fn last(&self) -> &S {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

/// Precomputed diagonal and coupling factors of dC/dτ.
struct Factors {
    coupling: C64,
    /// -i ω̃ per site (all zero in the recoil-neglected model).
    diag_atom: Array2<C64>,
    /// -i (ω̃ + Δ') - κ'/2 per site.
    diag_photon: Array2<C64>,
}

impl Factors {
    fn new(params: &Params, model: Model, m_max: usize, two_axes: bool) -> Self {
        let s = 2 * m_max + 1;
        let cols = if two_axes { s } else { 1 };
        let mut diag_atom = Array2::<C64>::zeros((s, cols));
        for j in 0..s {
            let wm = {
                let m = j as f64 - m_max as f64;
                (params.q1 + m).powi(2)
            };
            for k in 0..cols {
                let wn = if two_axes {
                    let n = k as f64 - m_max as f64;
                    (params.q2 + n).powi(2)
                } else {
                    0.0
                };
                let w = match model {
                    Model::Full => wm + wn,
                    Model::Rna => 0.0,
                };
                diag_atom[[j, k]] = C64::new(0.0, -w);
            }
        }
        let photon_shift = C64::new(-params.kappa / 2.0, -params.delta);
        let diag_photon = &diag_atom + photon_shift;
        Self { coupling: C64::new(0.0, -params.omega), diag_atom, diag_photon }
    }
}

/// dst[j] += c * src[j + shift] along `axis`, zero past the window edge.
fn add_shifted(mut dst: ArrayViewMut2<C64>, src: ArrayView2<C64>, axis: usize, shift: i32, c: C64) {
    let s = dst.len_of(Axis(axis));
    match (axis, shift) {
        (0, 1) => dst.slice_mut(s![..s - 1, ..]).scaled_add(c, &src.slice(s![1.., ..])),
        (0, -1) => dst.slice_mut(s![1.., ..]).scaled_add(c, &src.slice(s![..s - 1, ..])),
        (1, 1) => dst.slice_mut(s![.., ..s - 1]).scaled_add(c, &src.slice(s![.., 1..])),
        (1, -1) => dst.slice_mut(s![.., 1..]).scaled_add(c, &src.slice(s![.., ..s - 1])),
        _ => unreachable!(),
    }
}

fn rhs_two_atom(f: &Factors, amps: &Array3<C64>) -> Array3<C64> {
    let mut d = Array3::<C64>::zeros(amps.raw_dim());
    let a1 = amps.index_axis(Axis(0), 0);
    let a2 = amps.index_axis(Axis(0), 1);
    let a3 = amps.index_axis(Axis(0), 2);
    {
        let mut d1 = d.index_axis_mut(Axis(0), 0);
        Zip::from(&mut d1).and(&a1).and(&f.diag_atom).for_each(|d, &a, &w| *d = w * a);
        add_shifted(d1.view_mut(), a3, 0, 1, f.coupling);
        add_shifted(d1, a3, 0, -1, f.coupling);
    }
    {
        let mut d2 = d.index_axis_mut(Axis(0), 1);
        Zip::from(&mut d2).and(&a2).and(&f.diag_atom).for_each(|d, &a, &w| *d = w * a);
        add_shifted(d2.view_mut(), a3, 1, 1, f.coupling);
        add_shifted(d2, a3, 1, -1, f.coupling);
    }
    {
        let mut d3 = d.index_axis_mut(Axis(0), 2);
        Zip::from(&mut d3).and(&a3).and(&f.diag_photon).for_each(|d, &a, &w| *d = w * a);
        add_shifted(d3.view_mut(), a1, 0, 1, f.coupling);
        add_shifted(d3.view_mut(), a1, 0, -1, f.coupling);
        add_shifted(d3.view_mut(), a2, 1, 1, f.coupling);
        add_shifted(d3, a2, 1, -1, f.coupling);
    }
    d
}

fn rhs_one_atom(f: &Factors, amps: &Array2<C64>) -> Array2<C64> {
    let s = amps.len_of(Axis(1));
    let mut d = Array2::<C64>::zeros(amps.raw_dim());
    let a1 = amps.row(0);
    let a2 = amps.row(1);
    let kin = f.diag_atom.column(0);
    let kin_ph = f.diag_photon.column(0);
    {
        let mut d1 = d.row_mut(0);
        Zip::from(&mut d1).and(&a1).and(&kin).for_each(|d, &a, &w| *d = w * a);
        d1.slice_mut(s![..s - 1]).scaled_add(f.coupling, &a2.slice(s![1..]));
        d1.slice_mut(s![1..]).scaled_add(f.coupling, &a2.slice(s![..s - 1]));
    }
    {
        let mut d2 = d.row_mut(1);
        Zip::from(&mut d2).and(&a2).and(&kin_ph).for_each(|d, &a, &w| *d = w * a);
        d2.slice_mut(s![..s - 1]).scaled_add(f.coupling, &a1.slice(s![1..]));
        d2.slice_mut(s![1..]).scaled_add(f.coupling, &a1.slice(s![..s - 1]));
    }
    d
}

fn validate_samples(t0: f64, sample_times: &[f64]) -> Result<(), DynamicsError> {
    if sample_times.is_empty() || sample_times[0] < t0 {
        return Err(DynamicsError::InvalidSampleTimes);
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(DynamicsError::InvalidSampleTimes);
    }
    Ok(())
}

fn initial_step(params: &Params) -> f64 {
    let scale = params.omega + params.delta.abs() + params.kappa / 2.0 + 1.0;
    (0.1 / scale).min(1e-2)
}

pub fn propagate_two_atom(
    params: &Params,
    model: Model,
    initial: &TwoAtomState,
    sample_times: &[f64],
    tol: f64,
) -> Result<Trajectory<TwoAtomState>, DynamicsError> {
    validate_samples(initial.time, sample_times)?;
    let m_max = initial.m_max();
    let f = Factors::new(params, model, m_max, true);
    let mut solver = Rk45::new(initial.time, initial.amps().clone(), tol, initial_step(params));
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut max_boundary = initial.boundary_population();
    for &t in sample_times {
        solver.advance_to(t, |_t, y| rhs_two_atom(&f, y))?;
        let st = TwoAtomState::from_amps(m_max, t, solver.y.clone());
        max_boundary = max_boundary.max(st.boundary_population());
        samples.push(st);
    }
    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            model,
            tolerance: tol,
            steps: solver.stats.accepted,
            rejected_steps: solver.stats.rejected,
            max_boundary_population: max_boundary,
        },
    })
}

pub fn propagate_one_atom(
    params: &Params,
    model: Model,
    initial: &OneAtomState,
    sample_times: &[f64],
    tol: f64,
) -> Result<Trajectory<OneAtomState>, DynamicsError> {
    validate_samples(initial.time, sample_times)?;
    let m_max = initial.m_max();
    let f = Factors::new(params, model, m_max, false);
    let mut solver = Rk45::new(initial.time, initial.amps().clone(), tol, initial_step(params));
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut max_boundary = initial.boundary_population();
    for &t in sample_times {
        solver.advance_to(t, |_t, y| rhs_one_atom(&f, y))?;
        let st = OneAtomState::from_amps(m_max, t, solver.y.clone());
        max_boundary = max_boundary.max(st.boundary_population());
        samples.push(st);
    }
    Ok(Trajectory {
        samples,
        meta: TrajectoryMeta {
            model,
            tolerance: tol,
            steps: solver.stats.accepted,
            rejected_steps: solver.stats.rejected,
            max_boundary_population: max_boundary,
        },
    })
}

/// Uniform sample grid from `t0` to `t_max` inclusive, `count` ≥ 2 points.
pub fn sample_grid(t0: f64, t_max: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && t_max > t0);
    let dt = (t_max - t0) / (count - 1) as f64;
    (0..count).map(|i| if i == count - 1 { t_max } else { t0 + i as f64 * dt }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Channel;

    fn params(omega: f64, kappa: f64, delta: f64) -> Params {
        Params::new(omega, kappa, delta, 0.0, 0.0, 0.0).unwrap()
    }

    /// One-atom recoil-neglected dynamics at κ' = Δ' = 0 maps onto a
    /// nearest-neighbor hopping chain (C1 on even sites, C2 on odd), so a
    /// delta seed evolves into (-i)^m J_m(2Ωτ).
    #[test]
    fn one_atom_chain_matches_bessel() {
        let p = params(1.0, 0.0, 0.0);
        let init = OneAtomState::delta_initial(40).unwrap();
        let traj = propagate_one_atom(&p, Model::Rna, &init, &[1.0], 1e-12).unwrap();
        let st = traj.last();
        let j = [
            0.22389077914123566805,
            0.5767248077568733872,
            0.35283402861563771915,
            0.1289432494744020511,
        ];
        assert!((st.amp(0, 0) - C64::new(j[0], 0.0)).norm() < 1e-10);
        assert!((st.amp(1, 1) - C64::new(0.0, -j[1])).norm() < 1e-10);
        assert!((st.amp(1, -1) - C64::new(0.0, -j[1])).norm() < 1e-10);
        assert!((st.amp(0, 2) - C64::new(-j[2], 0.0)).norm() < 1e-10);
        assert!((st.amp(0, -2) - C64::new(-j[2], 0.0)).norm() < 1e-10);
        assert!((st.amp(1, 3) - C64::new(0.0, j[3])).norm() < 1e-10);
        assert!(!traj.truncation_flagged());
    }

    /// 2 Re⟨y, dy/dτ⟩ must equal -κ' times the photon population: the
    /// coupling and kinetic parts are Hermitian, only the photon channel
    /// drains. Checked on an arbitrary dense state.
    #[test]
    fn norm_flux_is_photon_drain() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let p = params(3.0, 1.7, -0.9);
        let mut st = TwoAtomState::zeros(5);
        for c in st.amps_mut().iter_mut() {
            *c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let f = Factors::new(&p, Model::Full, 5, true);
        let d = rhs_two_atom(&f, st.amps());
        let flux: f64 = st
            .amps()
            .iter()
            .zip(d.iter())
            .map(|(a, da)| 2.0 * (a.conj() * da).re)
            .sum();
        let photon_pop: f64 =
            st.amps().index_axis(Axis(0), 2).iter().map(|c| c.norm_sqr()).sum();
        assert!(
            (flux + p.kappa * photon_pop).abs() < 1e-12,
            "flux {flux}, expected {}",
            -p.kappa * photon_pop
        );
    }

    #[test]
    fn undamped_norm_conserved_and_parity_exact() {
        let p = params(2.0, 0.0, 0.5);
        let init = TwoAtomState::delta_initial(8).unwrap();
        let traj = propagate_two_atom(&p, Model::Full, &init, &[0.5, 1.0], 1e-9).unwrap();
        for st in &traj.samples {
            assert!((st.survival_probability() - 1.0).abs() < 1e-7);
            // class B sites start at exactly zero and the stencil never
            // writes into them, no tolerance needed
            assert_eq!(st.class_b_population(), 0.0);
        }
    }

    #[test]
    fn tiny_window_gets_flagged() {
        let p = params(2.0, 0.0, 0.0);
        let init = TwoAtomState::delta_initial(2).unwrap();
        let traj = propagate_two_atom(&p, Model::Full, &init, &[1.0], 1e-8).unwrap();
        assert!(traj.truncation_flagged());
        assert!(matches!(
            traj.check_truncation(),
            Err(DynamicsError::Truncation { .. })
        ));
    }

    #[test]
    fn sample_validation() {
        let p = params(1.0, 0.0, 0.0);
        let init = TwoAtomState::delta_initial(3).unwrap();
        for bad in [&[][..], &[-1.0][..], &[0.5, 0.2][..]] {
            assert_eq!(
                propagate_two_atom(&p, Model::Rna, &init, bad, 1e-8).unwrap_err(),
                DynamicsError::InvalidSampleTimes
            );
        }
    }

    #[test]
    fn photon_emission_starts_symmetric() {
        // first emission step populates all four photon neighbors equally
        let p = params(5.0, 10.0, 0.0);
        let init = TwoAtomState::delta_initial(4).unwrap();
        let traj = propagate_two_atom(&p, Model::Full, &init, &[0.01], 1e-10).unwrap();
        let st = traj.last();
        let a = st.amp(Channel::Photon, 1, 0);
        let b = st.amp(Channel::Photon, -1, 0);
        assert!((a - b).norm() < 1e-12);
        assert!(a.norm() > 1e-3);
    }
}
