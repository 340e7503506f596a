//! Measurements on states and sampled trajectories.
//!
//! Everything here is pure read-out: survival and width curves, plateau
//! detection, and the pinned exponential-decay fit protocol. The decay time
//! of a damped run is extracted by least squares on ln P over the window
//! τ ∈ [4/κ', 40/κ']; earlier times are polluted by the fast transient in
//! which the bright admixture burns off, and the window is fixed here so
//! every caller measures the same quantity.

use thiserror::Error;

use crate::dynamics::Trajectory;
use crate::state::{OneAtomState, TwoAtomState};

/// A trajectory sample that carries a time and a survival probability.
pub trait Sampled {
    fn time(&self) -> f64;
    fn survival(&self) -> f64;
}

impl Sampled for TwoAtomState {
    fn time(&self) -> f64 {
        self.time
    }
    fn survival(&self) -> f64 {
        self.survival_probability()
    }
}

impl Sampled for OneAtomState {
    fn time(&self) -> f64 {
        self.time
    }
    fn survival(&self) -> f64 {
        self.survival_probability()
    }
}

pub fn survival_curve<S: Sampled>(traj: &Trajectory<S>) -> Vec<(f64, f64)> {
    traj.samples.iter().map(|s| (s.time(), s.survival())).collect()
}

/// RMS momentum of a distribution indexed m = -M ..= M, taken about m = 0
/// and normalized by the total weight. The reference initial states are at
/// rest and the dynamics is reflection symmetric, so the second moment about
/// zero is the spreading measure.
pub fn rms_momentum_width(dist: &[f64]) -> f64 {
    assert!(dist.len() % 2 == 1, "distribution length must be odd");
    let m_max = (dist.len() / 2) as i64;
    let mut total = 0.0;
    let mut second = 0.0;
    for (j, &p) in dist.iter().enumerate() {
        let m = (j as i64 - m_max) as f64;
        total += p;
        second += m * m * p;
    }
    if total == 0.0 {
        0.0
    } else {
        (second / total).sqrt()
    }
}

pub fn width_curve(traj: &Trajectory<OneAtomState>) -> Vec<(f64, f64)> {
    traj.samples
        .iter()
        .map(|s| (s.time, rms_momentum_width(&s.momentum_distribution())))
        .collect()
}

/// Fraction of the surviving population with |m| ≤ radius and |n| ≤ radius.
pub fn concentration(state: &TwoAtomState, radius: usize) -> f64 {
    let total = state.survival_probability();
    if total == 0.0 {
        return 0.0;
    }
    let r = radius.min(state.m_max()) as i32;
    let mut inside = 0.0;
    for ch in crate::state::Channel::ALL {
        for m in -r..=r {
            for n in -r..=r {
                inside += state.amp(ch, m, n).norm_sqr();
            }
        }
    }
    inside / total
}

/// First interior local maximum of a sampled curve.
pub fn first_local_max(curve: &[(f64, f64)]) -> Option<(f64, f64)> {
    for i in 1..curve.len().saturating_sub(1) {
        if curve[i].1 > curve[i - 1].1 && curve[i].1 >= curve[i + 1].1 {
            return Some(curve[i]);
        }
    }
    None
}

/// Trailing plateau of a curve: the longest suffix staying within
/// slope_tol·min_span of the final value. A band criterion rather than a
/// pointwise slope keeps fast low-amplitude ringing, which aliases into
/// large finite-difference slopes, from masking a settled curve. Returns
/// the plateau onset time and the mean value over it, or None if the
/// suffix spans less than `min_span`.
pub fn plateau(curve: &[(f64, f64)], min_span: f64, slope_tol: f64) -> Option<(f64, f64)> {
    let &(t_end, v_end) = curve.last()?;
    let band = slope_tol * min_span;
    let mut start = curve.len() - 1;
    while start > 0 && (curve[start - 1].1 - v_end).abs() <= band {
        start -= 1;
    }
    let (t_on, _) = curve[start];
    if t_end - t_on < min_span {
        return None;
    }
    let tail = &curve[start..];
    let mean = tail.iter().map(|&(_, v)| v).sum::<f64>() / tail.len() as f64;
    Some((t_on, mean))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("fit window [{lo}, {hi}] contains {points} samples, need at least 2")]
    Window { lo: f64, hi: f64, points: usize },
    #[error("survival is not positive at τ = {t}, cannot fit a log slope")]
    NonPositive { t: f64 },
}

/// Least-squares exponential P(τ) ≈ e^{log_amplitude} · e^{-rate·τ}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpFit {
    pub rate: f64,
    pub log_amplitude: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl ExpFit {
    /// 1/e time of the fitted decay.
    pub fn time_constant(&self) -> f64 {
        1.0 / self.rate
    }
}

/// Straight-line least squares on (τ, ln P) over samples with τ ∈ [lo, hi].
pub fn fit_exponential_rate(curve: &[(f64, f64)], lo: f64, hi: f64) -> Result<ExpFit, FitError> {
    let mut pts = Vec::new();
    for &(t, p) in curve {
        if t >= lo && t <= hi {
            if p <= 0.0 {
                return Err(FitError::NonPositive { t });
            }
            pts.push((t, p.ln()));
        }
    }
    let n = pts.len();
    if n < 2 {
        return Err(FitError::Window { lo, hi, points: n });
    }
    let nf = n as f64;
    let sx: f64 = pts.iter().map(|&(t, _)| t).sum();
    let sy: f64 = pts.iter().map(|&(_, y)| y).sum();
    let mx = sx / nf;
    let my = sy / nf;
    let sxx: f64 = pts.iter().map(|&(t, _)| (t - mx) * (t - mx)).sum();
    let sxy: f64 = pts.iter().map(|&(t, y)| (t - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|&(_, y)| (y - my) * (y - my)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|&(t, y)| {
            let r = y - (intercept + slope * t);
            r * r
        })
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(ExpFit { rate: -slope, log_amplitude: intercept, r_squared, points: n })
}

/// The pinned decay-fit window for damping κ'.
pub fn decay_window(kappa: f64) -> (f64, f64) {
    (4.0 / kappa, 40.0 / kappa)
}

/// Decay rate of a survival curve via the pinned protocol.
pub fn fit_decay(curve: &[(f64, f64)], kappa: f64) -> Result<ExpFit, FitError> {
    let (lo, hi) = decay_window(kappa);
    fit_exponential_rate(curve, lo, hi)
}
