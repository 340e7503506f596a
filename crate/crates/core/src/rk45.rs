//! Adaptive Dormand-Prince 5(4) integrator over complex amplitude arrays.
//!
//! The coefficient freedom is used the usual way: fifth-order solution
//! propagated, embedded fourth-order difference as the error estimate, first
//! same as last. Error control is per unit step, ‖y5 - y4‖₂ ≤ tol·h, so the
//! accumulated norm drift of a contractive run stays bounded by a small
//! multiple of tol times the elapsed time.

use ndarray::{Array, Dimension};
use num_complex::Complex64 as C64;
use thiserror::Error;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
// Fifth-order weights (also the seventh stage position: FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// y5 - y4 weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const SAFETY: f64 = 0.9;
const SHRINK_MIN: f64 = 0.2;
const GROW_MAX: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("step size underflow at t = {t}: h = {h}")]
    StepFailure { t: f64, h: f64 },
}

/// Counters accumulated over an integration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

fn l2_norm<D: Dimension>(a: &Array<C64, D>) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Adaptive integrator state for dy/dt = f(t, y).
pub struct Rk45<D: Dimension> {
    pub t: f64,
    pub y: Array<C64, D>,
    h: f64,
    tol: f64,
    k1: Option<Array<C64, D>>,
    pub stats: StepStats,
}

impl<D: Dimension> Rk45<D> {
    pub fn new(t0: f64, y0: Array<C64, D>, tol: f64, h0: f64) -> Self {
        Self { t: t0, y: y0, h: h0, tol, k1: None, stats: StepStats::default() }
    }

    /// Advance to exactly `t_end`, clamping the last step.
    pub fn advance_to<F>(&mut self, t_end: f64, mut f: F) -> Result<(), StepError>
    where
        F: FnMut(f64, &Array<C64, D>) -> Array<C64, D>,
    {
        while self.t < t_end {
            let clamped = self.h > t_end - self.t;
            let h = if clamped { t_end - self.t } else { self.h };
            let (y_new, err, k7) = self.try_step(h, &mut f);
            // Error per unit step.
            let tol_h = self.tol * h;
            if err <= tol_h {
                self.t += h;
                self.y = y_new;
                self.k1 = Some(k7);
                self.stats.accepted += 1;
                let factor = if err == 0.0 {
                    GROW_MAX
                } else {
                    (SAFETY * (tol_h / err).powf(0.25)).clamp(SHRINK_MIN, GROW_MAX)
                };
                if !clamped || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.stats.rejected += 1;
                self.h = h * (SAFETY * (tol_h / err).powf(0.25)).clamp(SHRINK_MIN, 1.0);
                self.k1 = None;
                if self.h < 1e-13 * (1.0 + self.t.abs()) {
                    return Err(StepError::StepFailure { t: self.t, h: self.h });
                }
            }
        }
        Ok(())
    }

    fn try_step<F>(&mut self, h: f64, f: &mut F) -> (Array<C64, D>, f64, Array<C64, D>)
    where
        F: FnMut(f64, &Array<C64, D>) -> Array<C64, D>,
    {
        let t = self.t;
        let y = &self.y;
        let hc = C64::new(h, 0.0);
        let k1 = match self.k1.take() {
            Some(k) => k,
            None => f(t, y),
        };
        let k2 = f(t + C2 * h, &(y + &(&k1 * (hc * A21))));
        let k3 = f(t + C3 * h, &(y + &(&k1 * (hc * A31)) + &(&k2 * (hc * A32))));
        let k4 = f(
            t + C4 * h,
            &(y + &(&k1 * (hc * A41)) + &(&k2 * (hc * A42)) + &(&k3 * (hc * A43))),
        );
        let k5 = f(
            t + C5 * h,
            &(y + &(&k1 * (hc * A51))
                + &(&k2 * (hc * A52))
                + &(&k3 * (hc * A53))
                + &(&k4 * (hc * A54))),
        );
        let k6 = f(
            t + h,
            &(y + &(&k1 * (hc * A61))
                + &(&k2 * (hc * A62))
                + &(&k3 * (hc * A63))
                + &(&k4 * (hc * A64))
                + &(&k5 * (hc * A65))),
        );
        let y_new = y
            + &(&k1 * (hc * B1))
            + &(&k3 * (hc * B3))
            + &(&k4 * (hc * B4))
            + &(&k5 * (hc * B5))
            + &(&k6 * (hc * B6));
        let k7 = f(t + h, &y_new);
        let err_vec = &(&k1 * (hc * E1))
            + &(&k3 * (hc * E3))
            + &(&k4 * (hc * E4))
            + &(&k5 * (hc * E5))
            + &(&k6 * (hc * E6))
            + &(&k7 * (hc * E7));
        // put k1 back in case the step is rejected and retried
        self.k1 = Some(k1);
        (y_new, l2_norm(&err_vec), k7)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, Ix1};

    // dy/dt = λy with complex λ has the exact solution e^{λt} y0.
    fn exp_rhs(lambda: C64) -> impl FnMut(f64, &Array<C64, Ix1>) -> Array<C64, Ix1> {
        move |_t, y| y * lambda
    }

    #[test]
    fn oscillator_accuracy() {
        let lambda = C64::new(0.0, 3.0);
        let y0 = arr1(&[C64::new(1.0, 0.0)]);
        let mut s = Rk45::new(0.0, y0, 1e-10, 1e-3);
        s.advance_to(7.0, exp_rhs(lambda)).unwrap();
        let exact = (lambda * 7.0).exp();
        assert!((s.y[0] - exact).norm() < 1e-8, "err {}", (s.y[0] - exact).norm());
        assert!(s.stats.accepted > 0);
    }

    #[test]
    fn damped_norm_drift_bounded() {
        let lambda = C64::new(-2.0, 40.0);
        let y0 = arr1(&[C64::new(1.0, 0.0)]);
        let tol = 1e-8;
        let mut s = Rk45::new(0.0, y0, tol, 1e-3);
        s.advance_to(3.0, exp_rhs(lambda)).unwrap();
        let exact = (lambda * 3.0).exp();
        assert!((s.y[0] - exact).norm() < 10.0 * tol * 3.0);
    }

    #[test]
    fn lands_exactly_on_target() {
        let y0 = arr1(&[C64::new(1.0, 0.0)]);
        let mut s = Rk45::new(0.0, y0, 1e-9, 0.7);
        s.advance_to(0.3, exp_rhs(C64::new(0.0, 1.0))).unwrap();
        assert_eq!(s.t, 0.3);
        s.advance_to(0.9, exp_rhs(C64::new(0.0, 1.0))).unwrap();
        assert_eq!(s.t, 0.9);
    }

    #[test]
    fn rejections_happen_and_recover() {
        // stiff-ish start: big initial h forces a rejection
        let y0 = arr1(&[C64::new(1.0, 0.0)]);
        let mut s = Rk45::new(0.0, y0, 1e-10, 10.0);
        s.advance_to(1.0, exp_rhs(C64::new(0.0, 50.0))).unwrap();
        assert!(s.stats.rejected > 0);
        let exact = (C64::new(0.0, 50.0)).exp();
        assert!((s.y[0] - exact).norm() < 1e-6);
    }
}
