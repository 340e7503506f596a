//! Position-space representation and split-step evolution.
//!
//! Fields ψ_i(x1, x2) live on a square grid, either on the ring (periodic,
//! coordinates ξ = 2πj/G, one full mode wavelength) or in a box with hard
//! walls (coordinates s = j/(G+1) in box units, interior points only, mode
//! cos(πνs + φ) with ν counting half-wavelengths between the walls).
//!
//! Evolution is Strang-split: a half step of kinetic motion applied in the
//! diagonal basis (plane waves on the ring, sine modes in the box), the
//! exact pointwise coupling-damping propagator from [`crate::rna`], and
//! another kinetic half step. The coupling step being exact, the only time
//! discretization error is the kinetic-coupling commutator, and the step
//! size is rejected outright when dτ times the largest kinetic eigenvalue
//! leaves the regime where that error is controlled.

use std::sync::Arc;

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::Params;
use crate::rna;
use crate::state::{Channel, TwoAtomState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Periodic,
    Trap { nu: f64 },
}

impl Domain {
    /// Grid coordinates: ξ on the ring, s in the box.
    pub fn positions(&self, g: usize) -> Vec<f64> {
        match self {
            Domain::Periodic => {
                (0..g).map(|j| 2.0 * std::f64::consts::PI * j as f64 / g as f64).collect()
            }
            Domain::Trap { .. } => (1..=g).map(|j| j as f64 / (g + 1) as f64).collect(),
        }
    }

    /// Mode function at the grid points, with phase offset φ.
    fn coupling(&self, g: usize, phi: f64) -> Vec<f64> {
        match self {
            Domain::Periodic => self.positions(g).iter().map(|&xi| (xi + phi).cos()).collect(),
            Domain::Trap { nu } => self
                .positions(g)
                .iter()
                .map(|&s| (std::f64::consts::PI * nu * s + phi).cos())
                .collect(),
        }
    }

    /// Kinetic eigenvalues along one axis in the diagonal basis. Plane waves
    /// carry (q + m)² with the quasi-momentum q; box modes carry (q_idx/ν)²
    /// and ignore quasi-momentum, which has no meaning between hard walls.
    fn kinetic(&self, g: usize, q: f64) -> Vec<f64> {
        match self {
            Domain::Periodic => (0..g)
                .map(|j| {
                    let m = wavenumber(j, g) as f64;
                    (q + m) * (q + m)
                })
                .collect(),
            Domain::Trap { nu } => {
                (1..=g).map(|j| (j as f64 / nu) * (j as f64 / nu)).collect()
            }
        }
    }
}

/// Plane-wave index of FFT bin j: 0, 1, ..., then negative frequencies.
fn wavenumber(j: usize, g: usize) -> i64 {
    if j <= (g - 1) / 2 {
        j as i64
    } else {
        j as i64 - g as i64
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("dτ = {dtau} times max kinetic eigenvalue {max_kinetic:.3e} exceeds 0.5")]
    StabilityViolation { dtau: f64, max_kinetic: f64 },
    #[error("grid with {g} points cannot represent {needed} momentum modes")]
    GridTooSmall { g: usize, needed: usize },
    #[error("operation requires a {expected} domain")]
    DomainMismatch { expected: &'static str },
    #[error("step size must be positive and the target time must not precede the field time")]
    BadTimeStep,
}

/// Two-atom excitation amplitudes on a position grid, shape (3, G, G).
#[derive(Debug, Clone, PartialEq)]
pub struct PositionField {
    domain: Domain,
    pub time: f64,
    psi: Array3<C64>,
}

impl PositionField {
    pub fn from_fn(
        domain: Domain,
        g: usize,
        f: impl Fn(usize, f64, f64) -> C64,
    ) -> Self {
        let pos = domain.positions(g);
        let mut psi = Array3::zeros((3, g, g));
        for ch in 0..3 {
            for (j, &x1) in pos.iter().enumerate() {
                for (k, &x2) in pos.iter().enumerate() {
                    psi[[ch, j, k]] = f(ch, x1, x2);
                }
            }
        }
        Self { domain, time: 0.0, psi }
    }

    pub(crate) fn from_parts(domain: Domain, psi: Array3<C64>) -> Self {
        assert_eq!(psi.len_of(Axis(1)), psi.len_of(Axis(2)));
        assert_eq!(psi.len_of(Axis(0)), 3);
        Self { domain, time: 0.0, psi }
    }

    /// ψ = (1, 0, 0): the position-space face of the delta momentum seed.
    pub fn uniform_first_excited(g: usize) -> Self {
        let mut psi = Array3::zeros((3, g, g));
        psi.index_axis_mut(Axis(0), 0).fill(C64::new(1.0, 0.0));
        Self { domain: Domain::Periodic, time: 0.0, psi }
    }

    /// The candidate trapped state built from box mode `n_mode`:
    /// sin(Nπs1) sin(Nπs2) (cos(Nπs2), -cos(Nπs1), 0), normalized. Exact and
    /// stationary when the box holds the cavity mode commensurately
    /// (ν = N integer) and the mode phase is unshifted; built here for any
    /// box ν so the failure of those conditions can be watched directly.
    pub fn trap_dark_candidate(g: usize, n_mode: u32, nu: f64) -> Self {
        let kn = std::f64::consts::PI * n_mode as f64;
        let mut field = Self::from_fn(Domain::Trap { nu }, g, |ch, s1, s2| match ch {
            0 => C64::new((kn * s1).sin() * (kn * s2).sin() * (kn * s2).cos(), 0.0),
            1 => C64::new(-(kn * s1).cos() * (kn * s1).sin() * (kn * s2).sin(), 0.0),
            _ => C64::new(0.0, 0.0),
        });
        let norm = field.norm_sq().sqrt();
        field.psi.mapv_inplace(|c| c / norm);
        field
    }

    /// Synthesize the periodic field Σ C_{mn} e^{i(mξ1 + nξ2)} from lattice
    /// amplitudes.
    pub fn from_lattice(state: &TwoAtomState, g: usize) -> Result<Self, GridError> {
        let needed = 2 * state.m_max() + 1;
        if g < needed {
            return Err(GridError::GridTooSmall { g, needed });
        }
        let mut psi = Array3::zeros((3, g, g));
        let mm = state.m_max() as i32;
        for ch in Channel::ALL {
            for m in -mm..=mm {
                for n in -mm..=mm {
                    let j = (m.rem_euclid(g as i32)) as usize;
                    let k = (n.rem_euclid(g as i32)) as usize;
                    psi[[ch.index(), j, k]] = state.amp(ch, m, n);
                }
            }
        }
        // unnormalized inverse transform on both axes is exactly the mode sum
        let inv = FftPlanner::new().plan_fft_inverse(g);
        for ch in 0..3 {
            let mut plane = psi.index_axis(Axis(0), ch).to_owned();
            fft2(&mut plane, &inv, 1.0);
            psi.index_axis_mut(Axis(0), ch).assign(&plane);
        }
        Ok(Self { domain: Domain::Periodic, time: state.time, psi })
    }

    /// Project the periodic field back onto lattice amplitudes C_{mn}.
    pub fn to_lattice(&self, m_max: usize) -> Result<TwoAtomState, GridError> {
        let g = self.g();
        if let Domain::Trap { .. } = self.domain {
            return Err(GridError::DomainMismatch { expected: "periodic" });
        }
        let needed = 2 * m_max + 1;
        if g < needed {
            return Err(GridError::GridTooSmall { g, needed });
        }
        let fwd = FftPlanner::new().plan_fft_forward(g);
        let mut st = TwoAtomState::zeros(m_max);
        st.time = self.time;
        let scale = 1.0 / (g * g) as f64;
        for ch in Channel::ALL {
            let mut plane = self.psi.index_axis(Axis(0), ch.index()).to_owned();
            fft2(&mut plane, &fwd, scale);
            let mm = m_max as i32;
            for m in -mm..=mm {
                for n in -mm..=mm {
                    let j = (m.rem_euclid(g as i32)) as usize;
                    let k = (n.rem_euclid(g as i32)) as usize;
                    st.set_amp(ch, m, n, plane[[j, k]]);
                }
            }
        }
        Ok(st)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn g(&self) -> usize {
        self.psi.len_of(Axis(1))
    }

    pub fn psi(&self) -> &Array3<C64> {
        &self.psi
    }

    pub fn psi_mut(&mut self) -> &mut Array3<C64> {
        &mut self.psi
    }

    /// Squared norm in the domain measure: the grid mean on the ring, the
    /// Δs²-weighted sum in the box.
    pub fn norm_sq(&self) -> f64 {
        let g = self.g();
        let w = match self.domain {
            Domain::Periodic => 1.0 / (g * g) as f64,
            Domain::Trap { .. } => 1.0 / ((g + 1) * (g + 1)) as f64,
        };
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * w
    }

    /// Norm of the bright field c1ψ1 + c2ψ2 relative to the field norm:
    /// zero exactly when the state is annihilated by the coupling. The mode
    /// phase φ is taken from `params`.
    pub fn darkness_residual(&self, params: &Params) -> f64 {
        let g = self.g();
        let c = self.domain.coupling(g, params.phi);
        let mut bright = 0.0;
        for j in 0..g {
            for k in 0..g {
                let b = self.psi[[0, j, k]] * c[j] + self.psi[[1, j, k]] * c[k];
                bright += b.norm_sqr();
            }
        }
        let w = match self.domain {
            Domain::Periodic => 1.0 / (g * g) as f64,
            Domain::Trap { .. } => 1.0 / ((g + 1) * (g + 1)) as f64,
        };
        (bright * w / self.norm_sq()).sqrt()
    }
}

fn fft_rows(a: &mut Array2<C64>, fft: &Arc<dyn Fft<f64>>) {
    for mut row in a.rows_mut() {
        fft.process(row.as_slice_mut().expect("rows are contiguous"));
    }
}

fn transpose_square(a: &mut Array2<C64>) {
    let n = a.len_of(Axis(0));
    for i in 0..n {
        for j in (i + 1)..n {
            let t = a[[i, j]];
            a[[i, j]] = a[[j, i]];
            a[[j, i]] = t;
        }
    }
}

/// Unnormalized 2-D transform (rows then columns), then a uniform scale.
fn fft2(a: &mut Array2<C64>, fft: &Arc<dyn Fft<f64>>, scale: f64) {
    fft_rows(a, fft);
    transpose_square(a);
    fft_rows(a, fft);
    transpose_square(a);
    if scale != 1.0 {
        a.mapv_inplace(|c| c * scale);
    }
}

/// DST-I of length G along rows, computed through an odd extension of
/// length 2(G+1). Self-inverse up to the factor 2/(G+1).
struct Dst1 {
    g: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<C64>,
}

impl Dst1 {
    fn new(g: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (g + 1));
        Self { g, fft, buf: vec![C64::new(0.0, 0.0); 2 * (g + 1)] }
    }

    fn rows(&mut self, a: &mut Array2<C64>) {
        let g = self.g;
        let half_i = C64::new(0.0, 0.5);
        for mut row in a.rows_mut() {
            self.buf[0] = C64::new(0.0, 0.0);
            self.buf[g + 1] = C64::new(0.0, 0.0);
            for j in 0..g {
                self.buf[1 + j] = row[j];
                self.buf[2 * g + 1 - j] = -row[j];
            }
            self.fft.process(&mut self.buf);
            for q in 0..g {
                row[q] = self.buf[q + 1] * half_i;
            }
        }
    }

    fn transform2(&mut self, a: &mut Array2<C64>, scale: f64) {
        self.rows(a);
        transpose_square(a);
        self.rows(a);
        transpose_square(a);
        if scale != 1.0 {
            a.mapv_inplace(|c| c * scale);
        }
    }
}

/// Precomputed exact coupling propagator for one fixed step at one point.
enum PointProp {
    Node { decay: C64 },
    Mix { u1: f64, u2: f64, e11: C64, e12: C64, e22: C64 },
}

fn point_prop(params: &Params, c1: f64, c2: f64, dt: f64) -> PointProp {
    let csq = c1 * c1 + c2 * c2;
    let d = C64::new(-params.kappa / 2.0, -params.delta);
    if csq < rna::NODE_THRESHOLD {
        return PointProp::Node { decay: (d * dt).exp() };
    }
    let c = csq.sqrt();
    let b = C64::new(0.0, -2.0 * params.omega * c);
    let sigma = (d * d / 4.0 + b * b).sqrt();
    let z = sigma * dt;
    let ch = z.cosh();
    let sh_t = rna::sinhc(z) * dt;
    let env = (d * dt / 2.0).exp();
    PointProp::Mix {
        u1: c1 / c,
        u2: c2 / c,
        e11: env * (ch - d / 2.0 * sh_t),
        e12: env * (b * sh_t),
        e22: env * (ch + d / 2.0 * sh_t),
    }
}

fn apply_point(p: &PointProp, a1: C64, a2: C64, a3: C64) -> (C64, C64, C64) {
    match p {
        PointProp::Node { decay } => (a1, a2, a3 * decay),
        PointProp::Mix { u1, u2, e11, e12, e22 } => {
            let dark = a1 * *u2 - a2 * *u1;
            let bright = a1 * *u1 + a2 * *u2;
            let bright_new = e11 * bright + e12 * a3;
            let a3_new = e12 * bright + e22 * a3;
            (dark * *u2 + bright_new * *u1, -dark * *u1 + bright_new * *u2, a3_new)
        }
    }
}

enum KineticStep {
    Periodic { fwd: Arc<dyn Fft<f64>>, inv: Arc<dyn Fft<f64>>, phase: Array2<C64> },
    Trap { dst: Dst1, phase: Array2<C64> },
}

struct Evolver {
    kinetic: KineticStep,
    props: Vec<PointProp>,
    g: usize,
}

impl Evolver {
    fn new(params: &Params, domain: Domain, g: usize, dt: f64) -> Result<Self, GridError> {
        let k1 = domain.kinetic(g, params.q1);
        let k2 = domain.kinetic(g, params.q2);
        let max_kin = k1.iter().fold(0.0f64, |a, &b| a.max(b))
            + k2.iter().fold(0.0f64, |a, &b| a.max(b));
        if dt * max_kin >= 0.5 {
            return Err(GridError::StabilityViolation { dtau: dt, max_kinetic: max_kin });
        }
        let half_phase = |scale: f64| {
            Array2::from_shape_fn((g, g), |(j, k)| {
                (C64::new(0.0, -(k1[j] + k2[k]) * dt / 2.0)).exp() * scale
            })
        };
        let kinetic = match domain {
            Domain::Periodic => {
                let mut planner = FftPlanner::new();
                KineticStep::Periodic {
                    fwd: planner.plan_fft_forward(g),
                    inv: planner.plan_fft_inverse(g),
                    phase: half_phase(1.0 / (g * g) as f64),
                }
            }
            Domain::Trap { .. } => KineticStep::Trap {
                dst: Dst1::new(g),
                phase: half_phase((2.0 / (g + 1) as f64) * (2.0 / (g + 1) as f64)),
            },
        };
        let c = domain.coupling(g, params.phi);
        let mut props = Vec::with_capacity(g * g);
        for j in 0..g {
            for k in 0..g {
                props.push(point_prop(params, c[j], c[k], dt));
            }
        }
        Ok(Self { kinetic, props, g })
    }

    fn kinetic_half(&mut self, plane: &mut Array2<C64>) {
        match &mut self.kinetic {
            KineticStep::Periodic { fwd, inv, phase } => {
                fft2(plane, fwd, 1.0);
                *plane *= &*phase;
                fft2(plane, inv, 1.0);
            }
            KineticStep::Trap { dst, phase } => {
                dst.transform2(plane, 1.0);
                *plane *= &*phase;
                dst.transform2(plane, 1.0);
            }
        }
    }

    fn step(&mut self, psi: &mut Array3<C64>) {
        for ch in 0..3 {
            let mut plane = psi.index_axis(Axis(0), ch).to_owned();
            self.kinetic_half(&mut plane);
            psi.index_axis_mut(Axis(0), ch).assign(&plane);
        }
        let g = self.g;
        for j in 0..g {
            for k in 0..g {
                let (a1, a2, a3) = apply_point(
                    &self.props[j * g + k],
                    psi[[0, j, k]],
                    psi[[1, j, k]],
                    psi[[2, j, k]],
                );
                psi[[0, j, k]] = a1;
                psi[[1, j, k]] = a2;
                psi[[2, j, k]] = a3;
            }
        }
        for ch in 0..3 {
            let mut plane = psi.index_axis(Axis(0), ch).to_owned();
            self.kinetic_half(&mut plane);
            psi.index_axis_mut(Axis(0), ch).assign(&plane);
        }
    }
}

/// Full-model split-step evolution to each sample time in turn. Within a
/// segment the step is uniform and no larger than `dtau`.
pub fn grid_evolve_sampled(
    params: &Params,
    field: &PositionField,
    sample_times: &[f64],
    dtau: f64,
) -> Result<Vec<PositionField>, GridError> {
    if !(dtau > 0.0) || sample_times.is_empty() || sample_times[0] < field.time {
        return Err(GridError::BadTimeStep);
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(GridError::BadTimeStep);
    }
    let g = field.g();
    let mut out = Vec::with_capacity(sample_times.len());
    let mut current = field.clone();
    for &t in sample_times {
        let span = t - current.time;
        if span > 0.0 {
            let steps = (span / dtau).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            let mut ev = Evolver::new(params, current.domain, g, dt)?;
            for _ in 0..steps {
                ev.step(&mut current.psi);
            }
            current.time = t;
        }
        out.push(current.clone());
    }
    Ok(out)
}

pub fn grid_evolve(
    params: &Params,
    field: &PositionField,
    t_end: f64,
    dtau: f64,
) -> Result<PositionField, GridError> {
    Ok(grid_evolve_sampled(params, field, &[t_end], dtau)?.pop().unwrap())
}

/// Recoil-neglected evolution of a field: the exact pointwise propagator
/// applied in a single step of any length.
pub fn rna_grid_evolve(params: &Params, field: &PositionField, t_end: f64) -> PositionField {
    let g = field.g();
    let span = t_end - field.time;
    let c = field.domain.coupling(g, params.phi);
    let mut out = field.clone();
    for j in 0..g {
        for k in 0..g {
            let y = rna::PointwiseTriple::new(
                field.psi[[0, j, k]],
                field.psi[[1, j, k]],
                field.psi[[2, j, k]],
            );
            let r = rna::rna_pointwise_propagate(params, c[j], c[k], span, &y);
            out.psi[[0, j, k]] = r.a1;
            out.psi[[1, j, k]] = r.a2;
            out.psi[[2, j, k]] = r.a3;
        }
    }
    out.time = t_end;
    out
}

/// Expand a box field on the orthonormal sine modes; coefficient (ch, q, r)
/// multiplies 2 sin(qπs1) sin(rπs2) with q, r = 1..G. Parseval holds exactly
/// on the grid: Σ|a|² equals the field's squared norm.
pub fn trap_eigenexpand(field: &PositionField) -> Result<Array3<C64>, GridError> {
    if !matches!(field.domain, Domain::Trap { .. }) {
        return Err(GridError::DomainMismatch { expected: "trap" });
    }
    let g = field.g();
    let mut dst = Dst1::new(g);
    let mut out = Array3::zeros((3, g, g));
    let scale = 2.0 / ((g + 1) * (g + 1)) as f64;
    for ch in 0..3 {
        let mut plane = field.psi.index_axis(Axis(0), ch).to_owned();
        dst.transform2(&mut plane, scale);
        out.index_axis_mut(Axis(0), ch).assign(&plane);
    }
    Ok(out)
}

/// Momentum amplitude of the asymptotic trapped field by direct quadrature:
/// the mean of e^{-i(mξ1+nξ2)} f_i(ξ1, ξ2)/(cos²ξ1 + cos²ξ2) with
/// f_1 = cos²ξ2 and f_2 = -cosξ1 cosξ2, on a midpoint grid that straddles
/// the four points where the denominator vanishes. Converges cubically in
/// the grid size; an oracle for the exact table, sharing nothing with it.
pub fn quadrature_coefficient(channel: Channel, m: i32, n: i32, g: usize) -> f64 {
    if channel == Channel::Photon {
        return 0.0;
    }
    let step = 2.0 * std::f64::consts::PI / g as f64;
    let xi: Vec<f64> = (0..g).map(|j| (j as f64 + 0.5) * step).collect();
    let cosv: Vec<f64> = xi.iter().map(|&x| x.cos()).collect();
    let e1: Vec<C64> = xi.iter().map(|&x| C64::new(0.0, -(m as f64) * x).exp()).collect();
    let e2: Vec<C64> = xi.iter().map(|&x| C64::new(0.0, -(n as f64) * x).exp()).collect();
    let mut sum = C64::new(0.0, 0.0);
    for j in 0..g {
        let c1 = cosv[j];
        let mut inner = C64::new(0.0, 0.0);
        for k in 0..g {
            let c2 = cosv[k];
            let f = match channel {
                Channel::ExcGnd => c2 * c2,
                Channel::GndExc => -c1 * c2,
                Channel::Photon => unreachable!(),
            };
            inner += e2[k] * (f / (c1 * c1 + c2 * c2));
        }
        sum += e1[j] * inner;
    }
    (sum / (g * g) as f64).re
}
