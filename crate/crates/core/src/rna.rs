//! Exact solution of the recoil-neglected model at a single position.
//!
//! Without kinetic terms the position operators commute with everything, so
//! the position-space equations decouple point by point into a 3×3 linear
//! system with coupling strengths c1 = cos ξ1, c2 = cos ξ2 frozen at the
//! point. The combination c2·A1 - c1·A2 (the local dark amplitude) commutes
//! with the whole generator and never decays; the orthogonal bright
//! combination forms a damped 2×2 block with the photon amplitude, solved in
//! closed form below. Propagation is therefore exact for arbitrary τ.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::params::Params;

/// Below this value of c1² + c2² a point is treated as a node of both mode
/// functions: the atomic amplitudes freeze and the photon decays alone.
pub const NODE_THRESHOLD: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RnaError {
    #[error("both mode functions vanish at this point (c1² + c2² = {0:.3e}), no dark direction")]
    NodePoint(f64),
}

/// Amplitudes (A1, A2, A3) at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseTriple {
    pub a1: C64,
    pub a2: C64,
    pub a3: C64,
}

impl PointwiseTriple {
    pub fn new(a1: C64, a2: C64, a3: C64) -> Self {
        Self { a1, a2, a3 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr() + self.a3.norm_sqr()
    }
}

/// sinh(z)/z, series-expanded near zero where the quotient loses digits.
pub(crate) fn sinhc(z: C64) -> C64 {
    if z.norm() < 1e-6 {
        C64::new(1.0, 0.0) + z * z / 6.0
    } else {
        z.sinh() / z
    }
}

/// Building blocks of the damped 2×2 bright-photon block:
/// d/dτ (B, A3) = [[0, b], [b, d]] (B, A3).
fn block(params: &Params, c: f64) -> (C64, C64) {
    let b = C64::new(0.0, -2.0 * params.omega * c);
    let d = C64::new(-params.kappa / 2.0, -params.delta);
    (b, d)
}

/// Exact propagation of a pointwise triple by time τ.
pub fn rna_pointwise_propagate(
    params: &Params,
    c1: f64,
    c2: f64,
    tau: f64,
    y: &PointwiseTriple,
) -> PointwiseTriple {
    let csq = c1 * c1 + c2 * c2;
    let (_, d) = block(params, 0.0);
    if csq < NODE_THRESHOLD {
        return PointwiseTriple::new(y.a1, y.a2, y.a3 * (d * tau).exp());
    }
    let c = csq.sqrt();
    let (b, d) = block(params, c);
    let dark = (y.a1 * c2 - y.a2 * c1) / c;
    let bright = (y.a1 * c1 + y.a2 * c2) / c;
    // exp(τK) = e^{dτ/2} [cosh(στ) I + τ sinhc(στ) (K - (d/2) I)]
    let sigma = (d * d / 4.0 + b * b).sqrt();
    let z = sigma * tau;
    let ch = z.cosh();
    let sh_t = sinhc(z) * tau;
    let envelope = (d * tau / 2.0).exp();
    let bright_new = envelope * (ch * bright + sh_t * (-(d / 2.0) * bright + b * y.a3));
    let a3_new = envelope * (ch * y.a3 + sh_t * (b * bright + (d / 2.0) * y.a3));
    PointwiseTriple::new(
        (dark * c2 + bright_new * c1) / c,
        (-dark * c1 + bright_new * c2) / c,
        a3_new,
    )
}

/// Decay exponents of the pointwise generator: one exactly protected dark
/// mode and a damped pair whose exponents always sum to -iΔ' - κ'/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTriple {
    pub dark: C64,
    pub pair: (C64, C64),
}

pub fn rna_eigenvalues(params: &Params, c1: f64, c2: f64) -> EigenTriple {
    let c = (c1 * c1 + c2 * c2).sqrt();
    let (b, d) = block(params, c);
    let sigma = (d * d / 4.0 + b * b).sqrt();
    EigenTriple { dark: C64::new(0.0, 0.0), pair: (d / 2.0 + sigma, d / 2.0 - sigma) }
}

/// The τ → ∞ limit of a damped pointwise triple: its projection onto the
/// local dark direction (c2, -c1, 0)/c. Undefined at node points.
pub fn asymptotic_state(
    y: &PointwiseTriple,
    c1: f64,
    c2: f64,
) -> Result<PointwiseTriple, RnaError> {
    let csq = c1 * c1 + c2 * c2;
    if csq < NODE_THRESHOLD {
        return Err(RnaError::NodePoint(csq));
    }
    let amp = (y.a1 * c2 - y.a2 * c1) / csq;
    Ok(PointwiseTriple::new(amp * c2, -amp * c1, C64::new(0.0, 0.0)))
}
