//! Model parameters in recoil units.
//!
//! Everything downstream works in the dimensionless convention τ = ω_rec·t:
//! rates are measured in units of the recoil frequency ω_rec = ħk²/2M, the
//! coupling Ω is the single-photon Rabi coupling g/(2ω_rec), and momenta are
//! measured in units of the photon momentum ħk, split into an integer lattice
//! index and a conserved quasimomentum q ∈ [0, 1).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Physical parameters of one run, all in recoil units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Coupling Ω = g/(2ω_rec), strictly positive.
    pub omega: f64,
    /// Cavity field damping rate κ′ = κ/ω_rec, nonnegative.
    pub kappa: f64,
    /// Cavity-pump detuning Δ′ = Δ/ω_rec.
    pub delta: f64,
    /// Quasimomentum of the first atom, in [0, 1).
    pub q1: f64,
    /// Quasimomentum of the second atom, in [0, 1).
    pub q2: f64,
    /// Mode phase offset: the mode function is cos(kx + φ).
    ///
    /// Only the position-space oracle sees φ; the momentum-lattice equations
    /// are independent of it.
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("coupling must be positive, got {0}")]
    NonPositiveCoupling(f64),
    #[error("damping rate must be nonnegative, got {0}")]
    NegativeDamping(f64),
    #[error("quasimomentum must lie in [0, 1), got {0}")]
    QuasiMomentumRange(f64),
}

impl Params {
    pub fn new(
        omega: f64,
        kappa: f64,
        delta: f64,
        q1: f64,
        q2: f64,
        phi: f64,
    ) -> Result<Self, ParamsError> {
        if !(omega > 0.0) {
            return Err(ParamsError::NonPositiveCoupling(omega));
        }
        if !(kappa >= 0.0) {
            return Err(ParamsError::NegativeDamping(kappa));
        }
        for q in [q1, q2] {
            if !(0.0..1.0).contains(&q) {
                return Err(ParamsError::QuasiMomentumRange(q));
            }
        }
        Ok(Self { omega, kappa, delta, q1, q2, phi })
    }

    /// Resonant drive at zero quasimomentum; the configuration used throughout
    /// the reference figures.
    pub fn resonant(omega: f64, kappa: f64) -> Result<Self, ParamsError> {
        Self::new(omega, kappa, 0.0, 0.0, 0.0, 0.0)
    }
}
