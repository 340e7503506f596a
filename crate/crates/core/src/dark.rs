//! Dark-state structure: the exact asymptotic momentum table, the four-site
//! dark basis, closed-form stationary states, and decay-rate estimates.
//!
//! A delta-seeded two-atom run in the recoil-neglected model settles into a
//! trapped state whose momentum amplitudes c_{1,m,n} (atom 1 excited, m and n
//! even) and c_{2,m,n} (atom 2 excited, m and n odd) satisfy two closure
//! relations tying each amplitude to its momentum neighbors, plus reflection
//! symmetry in both indices. Starting from the axis values, which reduce to
//! a three-term integral recurrence, the relations determine the whole table.
//!
//! All of this is done in exact arithmetic over numbers of the form
//! r + s/π with r, s rational. The integral recurrence has a growing
//! parasitic solution (ratio ≈ 5.83 per step), so a floating-point march
//! loses roughly 0.77 digits per index and is useless beyond m ≈ 15; the
//! rational components also grow while the values stay O(1), so the final
//! r + s/π evaluation is done against a 300-digit rational approximation of
//! π before rounding once to f64.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::params::Params;
use crate::state::{Channel, StateError, TwoAtomState};

mod exact {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{Signed, ToPrimitive, Zero};

    pub(super) type Rat = BigRational;

    pub(super) fn rat(k: i64) -> Rat {
        Rat::from_integer(BigInt::from(k))
    }

    /// Round an exact rational to the nearest f64 without overflowing on
    /// large numerators: scale to a 64-bit quotient first, then apply the
    /// power of two (exact in binary floating point).
    pub(super) fn rat_to_f64(x: &Rat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        let sign = if x.is_negative() { -1.0 } else { 1.0 };
        let n = x.numer().abs();
        let d = x.denom().abs();
        let shift: i64 = 64 + d.bits() as i64 - n.bits() as i64;
        let q = if shift >= 0 { (&n << shift as usize) / &d } else { &n / (&d << (-shift) as usize) };
        let qf = q.to_f64().unwrap_or(f64::INFINITY);
        let e = (-shift).clamp(-2000, 2000) as i32;
        sign * qf * 2.0f64.powi(e)
    }

    const PI_340: &str = "3.141592653589793238462643383279502884197169399375105820974944592307816406286208998628034825342117067982148086513282306647093844609550582231725359408128481117450284102701938521105559644622948954930381964428810975665933446128475648233786783165271201909145648566923460348610454326648213393607260249141273724587006606315588174881520920962829254";

    pub(super) fn pi_rational() -> Rat {
        let (int_part, frac) = PI_340.split_once('.').unwrap();
        let digits: BigInt = format!("{int_part}{frac}").parse().unwrap();
        let scale = BigInt::from(10).pow(frac.len() as u32);
        Rat::new(digits, scale)
    }

    /// Value r + s/π, closed under the linear closure relations.
    #[derive(Debug, Clone, PartialEq)]
    pub(super) struct RatPi {
        pub r: Rat,
        pub s: Rat,
    }

    impl RatPi {
        pub fn add(&self, o: &Self) -> Self {
            Self { r: &self.r + &o.r, s: &self.s + &o.s }
        }

        pub fn neg(&self) -> Self {
            Self { r: -self.r.clone(), s: -self.s.clone() }
        }

        pub fn half(&self) -> Self {
            Self { r: &self.r / rat(2), s: &self.s / rat(2) }
        }

        pub fn to_f64(&self, inv_pi: &Rat) -> f64 {
            rat_to_f64(&(&self.r + &self.s * inv_pi))
        }
    }

    /// Component pairs (a_m, b_m) of the axis integrals I_m = i (a_m + b_m π),
    /// indexed so that entry k holds m = k - 1; I_{-1} = I_0 = iπ/2.
    pub(super) fn i_sequence(m_top: usize) -> Vec<(Rat, Rat)> {
        let mut seq = Vec::with_capacity(m_top + 2);
        seq.push((Rat::zero(), Rat::new(BigInt::from(1), BigInt::from(2))));
        seq.push((Rat::zero(), Rat::new(BigInt::from(1), BigInt::from(2))));
        for m in 1..=m_top as i64 {
            let (a2, b2) = &seq[(m - 1) as usize];
            let (a1, b1) = &seq[m as usize];
            let src = rat(if (m - 1) % 2 == 0 { 4 } else { -4 });
            let c1 = rat(6 * m - 3);
            let c2 = rat(m - 1);
            let mr = rat(m);
            let a = (&src - &c1 * a1 - &c2 * a2) / &mr;
            let b = (-(&c1 * b1) - &c2 * b2) / &mr;
            seq.push((a, b));
        }
        seq
    }

    /// Axis values c_{1,2k,0} = δ_{k0} + (i/2π)(I_k + I_{k-1}) as r + s/π.
    pub(super) fn axis(half_max: usize) -> Vec<RatPi> {
        let seq = i_sequence(half_max);
        (0..=half_max)
            .map(|k| {
                let (a1, b1) = &seq[k + 1];
                let (a0, b0) = &seq[k];
                let delta = if k == 0 { rat(1) } else { Rat::zero() };
                RatPi { r: delta - (b1 + b0) / rat(2), s: -((a1 + a0) / rat(2)) }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DarkError {
    #[error("closure relations produced an asymmetric table at ({m}, {n})")]
    InconsistentClosure { m: i32, n: i32 },
}

/// Exact momentum amplitudes of the asymptotic trapped state reached from
/// the delta seed, on the window |m|, |n| ≤ m_max.
///
/// Channel 1 amplitudes live on (even, even) sites and are reflection
/// symmetric in each index separately; channel 2 on (odd, odd), likewise.
/// The photon channel of the asymptotic state is empty.
#[derive(Debug, Clone)]
pub struct DarkTable {
    m_max: usize,
    c1: Array2<f64>,
    c2: Array2<f64>,
}

impl DarkTable {
    /// Fill the table exactly and round once to f64. Cost grows quickly with
    /// the window (rational bit lengths compound), but stays well under a
    /// second for the windows the analysis uses.
    pub fn build(m_max: usize) -> Result<Self, DarkError> {
        use exact::{rat, RatPi};
        let w = 2 * m_max + 6;
        let axis = exact::axis(w / 2);
        let mut c1: HashMap<(i32, i32), RatPi> = HashMap::new();
        let mut c2: HashMap<(i32, i32), RatPi> = HashMap::new();
        for m in (0..=w as i32).step_by(2) {
            c1.insert((m, 0), axis[(m / 2) as usize].clone());
        }
        // March the closure relations away from the axis. The first relation
        // (reflection-closed at n = 0) yields each odd c2 row from the c1 row
        // below it; the second yields the next c1 row. Each pass consumes an
        // m + 2 neighbor, so the reachable width shrinks by two per pair.
        let mut n: i32 = 0;
        let mut width = w as i32;
        while n < m_max as i32 + 2 {
            for m in (0..width - 1).step_by(2) {
                let sum = c1[&(m, n)].add(&c1[&(m + 2, n)]);
                let v = if n == 0 {
                    sum.neg().half()
                } else {
                    sum.add(&c2[&(m + 1, n - 1)]).neg()
                };
                c2.insert((m + 1, n + 1), v);
            }
            for m in (0..width - 1).step_by(2) {
                let left = if m >= 2 { &c2[&(m - 1, n + 1)] } else { &c2[&(1, n + 1)] };
                let mut v = c1[&(m, n)].neg().add(&c2[&(m + 1, n + 1)]).add(left);
                if m == 0 && n == 0 {
                    v.r += rat(1);
                }
                c1.insert((m, n + 2), v);
            }
            n += 2;
            width -= 2;
        }
        // m <-> n exchange symmetry of channel 2 is not imposed by the march;
        // it has to come out of the axis values, so check it exactly.
        for (&(m, n), v) in &c2 {
            if let Some(t) = c2.get(&(n, m)) {
                if t != v {
                    return Err(DarkError::InconsistentClosure { m, n });
                }
            }
        }
        let inv_pi = exact::pi_rational().recip();
        let half = m_max / 2 + 1;
        let mut c1f = Array2::zeros((half, half));
        let mut c2f = Array2::zeros((half, half));
        for ((m, n), v) in &c1 {
            if *m <= m_max as i32 && *n <= m_max as i32 {
                c1f[[(*m / 2) as usize, (*n / 2) as usize]] = v.to_f64(&inv_pi);
            }
        }
        for ((m, n), v) in &c2 {
            if *m <= m_max as i32 && *n <= m_max as i32 {
                c2f[[((*m - 1) / 2) as usize, ((*n - 1) / 2) as usize]] = v.to_f64(&inv_pi);
            }
        }
        Ok(Self { m_max, c1: c1f, c2: c2f })
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// Amplitude at a site; zero outside the window, on parity-forbidden
    /// sites, and throughout the photon channel.
    pub fn amplitude(&self, channel: Channel, m: i32, n: i32) -> f64 {
        let (ma, na) = (m.abs(), n.abs());
        if ma > self.m_max as i32 || na > self.m_max as i32 {
            return 0.0;
        }
        match channel {
            Channel::ExcGnd if ma % 2 == 0 && na % 2 == 0 => {
                self.c1[[(ma / 2) as usize, (na / 2) as usize]]
            }
            Channel::GndExc if ma % 2 == 1 && na % 2 == 1 => {
                self.c2[[((ma - 1) / 2) as usize, ((na - 1) / 2) as usize]]
            }
            _ => 0.0,
        }
    }

    /// Σ |c|² over the diamond |m| + |n| ≤ r.
    pub fn partial_norm_diamond(&self, r: usize) -> f64 {
        let rr = r as i32;
        let mut s = 0.0;
        for ch in [Channel::ExcGnd, Channel::GndExc] {
            for m in -rr..=rr {
                for n in -rr..=rr {
                    if m.abs() + n.abs() <= rr {
                        let c = self.amplitude(ch, m, n);
                        s += c * c;
                    }
                }
            }
        }
        s
    }

    /// Σ |c|² over the whole stored window; approaches 1/2 from below.
    pub fn window_norm(&self) -> f64 {
        let m = self.m_max as i32;
        let mut s = 0.0;
        for ch in [Channel::ExcGnd, Channel::GndExc] {
            for i in -m..=m {
                for j in -m..=m {
                    let c = self.amplitude(ch, i, j);
                    s += c * c;
                }
            }
        }
        s
    }

    pub fn to_state(&self, window: usize) -> Result<TwoAtomState, StateError> {
        if window < 2 {
            return Err(StateError::WindowTooSmall(window, 2));
        }
        let mut st = TwoAtomState::zeros(window);
        let w = window as i32;
        for ch in [Channel::ExcGnd, Channel::GndExc] {
            for m in -w..=w {
                for n in -w..=w {
                    let c = self.amplitude(ch, m, n);
                    if c != 0.0 {
                        st.set_amp(ch, m, n, C64::new(c, 0.0));
                    }
                }
            }
        }
        Ok(st)
    }

    /// Overlap of a four-site dark basis state with this table displaced by
    /// (m, n). With `exchanged` the displaced copy has the two atoms swapped,
    /// which maps channel 1 amplitudes onto transposed channel 2 values and
    /// vice versa.
    pub fn basis_table_overlap(
        &self,
        basis: &DarkBasisState,
        m: i32,
        n: i32,
        exchanged: bool,
    ) -> f64 {
        basis
            .sites()
            .iter()
            .map(|&(ch, sm, sn, amp)| {
                let v = if exchanged {
                    let swapped = match ch {
                        Channel::ExcGnd => Channel::GndExc,
                        Channel::GndExc => Channel::ExcGnd,
                        Channel::Photon => Channel::Photon,
                    };
                    self.amplitude(swapped, sn - n, sm - m)
                } else {
                    self.amplitude(ch, sm - m, sn - n)
                };
                amp * v
            })
            .sum()
    }
}

/// The four-site building block |d_mn⟩: two channel-1 sites at (m, n) and
/// (m, n+2) with weight +1/2, two channel-2 sites at (m±1, n+1) with weight
/// -1/2. Normalized; dark with respect to the coupling for any (m, n).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DarkBasisState {
    pub m: i32,
    pub n: i32,
}

impl DarkBasisState {
    pub fn new(m: i32, n: i32) -> Self {
        Self { m, n }
    }

    pub fn sites(&self) -> [(Channel, i32, i32, f64); 4] {
        [
            (Channel::ExcGnd, self.m, self.n, 0.5),
            (Channel::ExcGnd, self.m, self.n + 2, 0.5),
            (Channel::GndExc, self.m + 1, self.n + 1, -0.5),
            (Channel::GndExc, self.m - 1, self.n + 1, -0.5),
        ]
    }

    pub fn to_state(&self, m_max: usize) -> Result<TwoAtomState, StateError> {
        let needed = self
            .sites()
            .iter()
            .map(|&(_, m, n, _)| m.unsigned_abs().max(n.unsigned_abs()) as usize)
            .max()
            .unwrap();
        if m_max < needed.max(2) {
            return Err(StateError::WindowTooSmall(m_max, needed.max(2)));
        }
        let mut st = TwoAtomState::zeros(m_max);
        for (ch, m, n, a) in self.sites() {
            st.set_amp(ch, m, n, C64::new(a, 0.0));
        }
        Ok(st)
    }

    /// Mean squared momentum per axis over the four sites:
    /// (m² + 1/2, n² + 2n + 3/2).
    pub fn typical_momentum_sq(&self) -> (f64, f64) {
        let m = self.m as f64;
        let n = self.n as f64;
        (m * m + 0.5, n * n + 2.0 * n + 1.5)
    }

    /// Mean kinetic energy in recoil units at zero quasi-momentum.
    pub fn kinetic_energy(&self) -> f64 {
        let (a, b) = self.typical_momentum_sq();
        a + b
    }
}

pub fn basis_overlap(a: &DarkBasisState, b: &DarkBasisState) -> f64 {
    let mut s = 0.0;
    for (ca, ma, na, va) in a.sites() {
        for (cb, mb, nb, vb) in b.sites() {
            if ca == cb && ma == mb && na == nb {
                s += va * vb;
            }
        }
    }
    s
}

/// The two stationary dark states with the smallest kinetic energies at zero
/// quasi-momentum. Both are exact eigenstates of the full coupled problem:
/// the coupling annihilates them and every occupied site shares one kinetic
/// eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactDarkState {
    /// (cos ξ2, -cos ξ1, 0)/√2 in position space; kinetic energy 1.
    D1,
    /// sin ξ1 sin ξ2 (cos ξ2, -cos ξ1, 0), normalized; kinetic energy 5.
    D2,
}

impl ExactDarkState {
    pub fn kinetic_energy(&self) -> f64 {
        match self {
            ExactDarkState::D1 => 1.0,
            ExactDarkState::D2 => 5.0,
        }
    }

    pub fn sites(&self) -> Vec<(Channel, i32, i32, f64)> {
        use Channel::{ExcGnd, GndExc};
        match self {
            ExactDarkState::D1 => vec![
                (ExcGnd, 0, 1, 0.5),
                (ExcGnd, 0, -1, 0.5),
                (GndExc, 1, 0, -0.5),
                (GndExc, -1, 0, -0.5),
            ],
            ExactDarkState::D2 => {
                let a = 0.5 / std::f64::consts::SQRT_2;
                vec![
                    (ExcGnd, -1, 2, a),
                    (ExcGnd, 1, 2, -a),
                    (ExcGnd, 1, -2, a),
                    (ExcGnd, -1, -2, -a),
                    (GndExc, 2, 1, a),
                    (GndExc, -2, 1, -a),
                    (GndExc, 2, -1, -a),
                    (GndExc, -2, -1, a),
                ]
            }
        }
    }

    pub fn to_state(&self, m_max: usize) -> Result<TwoAtomState, StateError> {
        let needed = match self {
            ExactDarkState::D1 => 2,
            ExactDarkState::D2 => 2,
        };
        if m_max < needed {
            return Err(StateError::WindowTooSmall(m_max, needed));
        }
        let mut st = TwoAtomState::zeros(m_max);
        for (ch, m, n, a) in self.sites() {
            st.set_amp(ch, m, n, C64::new(a, 0.0));
        }
        Ok(st)
    }
}

/// Perturbative decay-rate estimate for a dark basis state: kinetic motion
/// admixes the bright manifold with amplitude ~ E/Ω, which then drains at κ',
/// giving Γ ≈ E² κ' / Ω² with E the state's mean kinetic energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEstimate {
    pub rate: f64,
    /// Set when κ' > 2Ω: the bright pair is overdamped there and the simple
    /// admixture picture no longer scales correctly.
    pub beyond_validity: bool,
}

pub fn decay_rate_estimate(state: &DarkBasisState, params: &Params) -> DecayEstimate {
    let e = state.kinetic_energy();
    DecayEstimate {
        rate: e * e * params.kappa / (params.omega * params.omega),
        beyond_validity: params.kappa > 2.0 * params.omega,
    }
}

/// Ladder of box modes sin(qπs) connected by multiplication with cos(Nπs),
/// which shifts q by ±N and reflects at the wall with a sign: the partner of
/// q < N is N - q with coupling -1/2 instead of +1/2. Modes are listed in
/// path order. A mode q ≡ 0 (mod N) descends to q = N, whose reflection
/// partner vanishes identically, so that chain is half-infinite; this
/// termination is what lets a trapped dark state close on finitely many
/// modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapChain {
    pub modes: Vec<u32>,
    /// Coupling of (modes[i], modes[i+1]); ±1/2.
    pub links: Vec<f64>,
    pub terminates_low: bool,
}

pub fn trap_coupling_chain(start: u32, cavity_n: u32, max_mode: u32) -> TrapChain {
    assert!(cavity_n > 0 && start > 0 && start <= max_mode);
    let r = start % cavity_n;
    if r == 0 {
        let modes: Vec<u32> = (1..).map(|k| k * cavity_n).take_while(|&q| q <= max_mode).collect();
        let links = vec![0.5; modes.len().saturating_sub(1)];
        return TrapChain { modes, links, terminates_low: true };
    }
    let u = r.min(cavity_n - r);
    let v = cavity_n - u;
    // descend the v branch, cross the reflecting link, ascend the u branch
    let mut modes: Vec<u32> =
        (0..).map(|k| v + k * cavity_n).take_while(|&q| q <= max_mode).collect();
    modes.reverse();
    let negative_at = modes.len().saturating_sub(1);
    modes.extend((0..).map(|k| u + k * cavity_n).take_while(|&q| q <= max_mode));
    let links = (0..modes.len() - 1).map(|i| if i == negative_at { -0.5 } else { 0.5 }).collect();
    TrapChain { modes, links, terminates_low: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_PI, PI};

    #[test]
    fn rational_to_f64_exactness() {
        use exact::{rat, rat_to_f64, Rat};
        use num_bigint::BigInt;
        assert_eq!(rat_to_f64(&rat(0)), 0.0);
        assert_eq!(rat_to_f64(&(rat(-7) / rat(2))), -3.5);
        let third = rat(1) / rat(3);
        assert!((rat_to_f64(&third) - 1.0 / 3.0).abs() < 1e-17);
        // huge numerator and denominator with an O(1) ratio
        let big = BigInt::from(10).pow(400);
        let x = Rat::new(&big + BigInt::from(1), big.clone());
        assert!((rat_to_f64(&x) - 1.0).abs() < 1e-15);
        assert_eq!(rat_to_f64(&Rat::new(BigInt::from(1), big)), 0.0);
    }

    #[test]
    fn embedded_pi_matches() {
        let p = exact::rat_to_f64(&exact::pi_rational());
        assert_eq!(p, PI);
    }

    #[test]
    fn axis_integral_values() {
        use exact::i_sequence;
        let inv = exact::pi_rational().recip();
        let seq = i_sequence(3);
        // I_1 = i(4 - 3π/2), I_2 = i(-20 + 13π/2)
        let render = |k: usize| {
            let (a, b) = &seq[k + 1];
            exact::rat_to_f64(&(a + b / &inv))
        };
        assert!((render(1) - (4.0 - 1.5 * PI)).abs() < 1e-15);
        assert!((render(1) + 0.7123889803846899).abs() < 1e-13);
        assert!((render(2) - 0.4203522483336560).abs() < 1e-13);
    }

    #[test]
    fn table_frozen_values() {
        let t = DarkTable::build(8).unwrap();
        use Channel::{ExcGnd, GndExc};
        assert_eq!(t.amplitude(ExcGnd, 0, 0), 0.5);
        assert!((t.amplitude(ExcGnd, 2, 0) - (0.5 - 2.0 * FRAC_1_PI)).abs() < 1e-15);
        assert!((t.amplitude(ExcGnd, 2, 0) + 0.13661977236758135).abs() < 1e-15);
        assert!((t.amplitude(ExcGnd, 0, 2) - 0.13661977236758135).abs() < 1e-15);
        assert!((t.amplitude(GndExc, 1, 1) - (FRAC_1_PI - 0.5)).abs() < 1e-15);
        assert!((t.amplitude(ExcGnd, 4, 0) - 0.04647908947032537).abs() < 1e-14);
        assert!((t.amplitude(ExcGnd, 6, 0) + 0.020188856562433081).abs() < 1e-14);
        assert!((t.amplitude(ExcGnd, 4, 2) + 0.014553864475643533).abs() < 1e-14);
        assert!((t.amplitude(GndExc, 3, 1) - 0.045070341448627989).abs() < 1e-14);
        assert!((t.amplitude(GndExc, 5, 1) + 0.013145116453946146).abs() < 1e-14);
        assert!((t.amplitude(GndExc, 3, 3) + 0.030516476972984454).abs() < 1e-14);
        assert!((t.amplitude(GndExc, 5, 5) + 0.011924841184854304).abs() < 1e-14);
        // reflection symmetry and the exchange symmetry of channel 2 hold to
        // the bit: same exact value rendered once
        assert_eq!(t.amplitude(ExcGnd, -4, 2), t.amplitude(ExcGnd, 4, 2));
        assert_eq!(t.amplitude(GndExc, 1, 3), t.amplitude(GndExc, 3, 1));
        // emergent exact zeros on the diagonal of channel 1
        assert_eq!(t.amplitude(ExcGnd, 2, 2), 0.0);
        assert_eq!(t.amplitude(ExcGnd, 4, 4), 0.0);
        assert_eq!(t.amplitude(ExcGnd, 6, 6), 0.0);
        // off-window and parity-forbidden sites
        assert_eq!(t.amplitude(ExcGnd, 1, 0), 0.0);
        assert_eq!(t.amplitude(Channel::Photon, 0, 0), 0.0);
        assert_eq!(t.amplitude(ExcGnd, 10, 0), 0.0);
    }

    #[test]
    fn closure_residuals_vanish() {
        let t = DarkTable::build(10).unwrap();
        use Channel::{ExcGnd, GndExc};
        let mut worst: f64 = 0.0;
        for m in (-8..=8).step_by(2) {
            for n in (-8..=8).step_by(2) {
                let r1 = t.amplitude(ExcGnd, m, n)
                    + t.amplitude(ExcGnd, m + 2, n)
                    + t.amplitude(GndExc, m + 1, n + 1)
                    + t.amplitude(GndExc, m + 1, n - 1);
                // under reflection the source of the second relation sits at
                // both (0, 0) and its mirror image (0, -2)
                let src = if m == 0 && (n == 0 || n == -2) { 1.0 } else { 0.0 };
                let r2 = t.amplitude(ExcGnd, m, n) + t.amplitude(ExcGnd, m, n + 2)
                    - t.amplitude(GndExc, m + 1, n + 1)
                    - t.amplitude(GndExc, m - 1, n + 1)
                    - src;
                worst = worst.max(r1.abs()).max(r2.abs());
            }
        }
        assert!(worst < 1e-14, "worst closure residual {worst:.2e}");
    }

    #[test]
    fn partial_norms() {
        let t = DarkTable::build(8).unwrap();
        assert!((t.partial_norm_diamond(2) - 0.45670503864126744).abs() < 1e-12);
        assert!((t.partial_norm_diamond(4) - 0.48159694709959666).abs() < 1e-12);
        let full = t.window_norm();
        assert!(full < 0.5 && full > 0.49, "window norm {full}");
    }

    #[test]
    fn basis_overlaps() {
        let d00 = DarkBasisState::new(0, 0);
        assert_eq!(basis_overlap(&d00, &d00), 1.0);
        assert_eq!(basis_overlap(&d00, &DarkBasisState::new(0, 2)), 0.25);
        assert_eq!(basis_overlap(&d00, &DarkBasisState::new(4, 4)), 0.0);
        let t = DarkTable::build(6).unwrap();
        // ⟨d_00 | table⟩ = 1/2 exactly: the 2/π pieces cancel
        assert!((t.basis_table_overlap(&d00, 0, 0, false) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn four_site_expansion_of_d00() {
        // |d_00⟩ = (T(0,0) + T(0,2) - X(1,1) - X(-1,1))/2 where T is the
        // displaced table and X its atom-exchanged copy. Checked site by
        // site: the tails cancel exactly.
        let t = DarkTable::build(10).unwrap();
        let d00 = DarkBasisState::new(0, 0);
        let combo = |ch: Channel, m: i32, n: i32| -> f64 {
            let direct = |dm: i32, dn: i32| t.amplitude(ch, m - dm, n - dn);
            let exch = |dm: i32, dn: i32| {
                let sw = if ch == Channel::ExcGnd { Channel::GndExc } else { Channel::ExcGnd };
                t.amplitude(sw, n - dn, m - dm)
            };
            0.5 * (direct(0, 0) + direct(0, 2) - exch(1, 1) - exch(-1, 1))
        };
        let expect = |ch: Channel, m: i32, n: i32| -> f64 {
            d00.sites()
                .iter()
                .filter(|&&(c, sm, sn, _)| c == ch && sm == m && sn == n)
                .map(|&(_, _, _, a)| a)
                .sum()
        };
        for m in -5..=5 {
            for n in -5..=5 {
                for ch in [Channel::ExcGnd, Channel::GndExc] {
                    let got = combo(ch, m, n);
                    let want = expect(ch, m, n);
                    assert!(
                        (got - want).abs() < 1e-14,
                        "site ({ch:?}, {m}, {n}): {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn basis_state_geometry() {
        let d = DarkBasisState::new(0, 0);
        assert_eq!(d.typical_momentum_sq(), (0.5, 1.5));
        assert_eq!(d.kinetic_energy(), 2.0);
        let st = d.to_state(4).unwrap();
        assert!((st.survival_probability() - 1.0).abs() < 1e-15);
        assert_eq!(
            DarkBasisState::new(3, 0).to_state(3),
            Err(StateError::WindowTooSmall(3, 4))
        );
        // the (m, n) -> (m, n+2) ladder overlap is independent of position
        let a = DarkBasisState::new(2, -4);
        let b = DarkBasisState::new(2, -2);
        assert_eq!(basis_overlap(&a, &b), 0.25);
    }

    #[test]
    fn exact_states_are_dark_and_normalized() {
        for (s, e) in [(ExactDarkState::D1, 1.0), (ExactDarkState::D2, 5.0)] {
            assert_eq!(s.kinetic_energy(), e);
            let st = s.to_state(4).unwrap();
            assert!((st.survival_probability() - 1.0).abs() < 1e-15);
            // every occupied site has kinetic eigenvalue e at q = 0, and the
            // coupling image vanishes: check the photon equation source
            // Σ_± C1(m∓1, n) + C2(m, n∓1) at every photon site
            for m in -4i32..=4 {
                for n in -4i32..=4 {
                    let mut src = 0.0;
                    for (ch, sm, sn, a) in s.sites() {
                        let hit = match ch {
                            Channel::ExcGnd => (sm - m).abs() == 1 && sn == n,
                            Channel::GndExc => sm == m && (sn - n).abs() == 1,
                            Channel::Photon => false,
                        };
                        if hit {
                            src += a;
                        }
                    }
                    assert_eq!(src, 0.0, "coupling residue at ({m}, {n})");
                }
            }
        }
    }

    #[test]
    fn decay_estimate_scalings() {
        let p = Params::new(50.0, 20.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let d00 = DarkBasisState::new(0, 0);
        let est = decay_rate_estimate(&d00, &p);
        assert!((est.rate - 0.032).abs() < 1e-15);
        assert!(!est.beyond_validity);
        let overdamped = Params::new(50.0, 120.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(decay_rate_estimate(&d00, &overdamped).beyond_validity);
        // rate grows with kinetic energy and damping, falls with coupling
        let d02 = DarkBasisState::new(0, 2);
        assert!(decay_rate_estimate(&d02, &p).rate > est.rate);
        let weaker = Params::new(25.0, 20.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(decay_rate_estimate(&d00, &weaker).rate > est.rate);
    }

    #[test]
    fn trap_chain_structure() {
        let c = trap_coupling_chain(1, 3, 8);
        assert_eq!(c.modes, vec![8, 5, 2, 1, 4, 7]);
        assert_eq!(c.links, vec![0.5, 0.5, -0.5, 0.5, 0.5]);
        assert!(!c.terminates_low);
        let t = trap_coupling_chain(3, 3, 12);
        assert_eq!(t.modes, vec![3, 6, 9, 12]);
        assert_eq!(t.links, vec![0.5, 0.5, 0.5]);
        assert!(t.terminates_low);
        // same half-chain entered from above
        let t2 = trap_coupling_chain(6, 3, 12);
        assert_eq!(t2.modes, t.modes);
    }

    #[test]
    fn trap_links_match_mode_integrals() {
        // ∫₀¹ 2 sin(qπs) cos(Nπs) sin(q'πs) ds against the chain signs
        let overlap = |q: u32, n: u32, qp: u32| -> f64 {
            let g = 20001;
            let mut s = 0.0;
            for j in 0..g {
                let x = (j as f64 + 0.5) / g as f64;
                s += 2.0
                    * (q as f64 * PI * x).sin()
                    * (n as f64 * PI * x).cos()
                    * (qp as f64 * PI * x).sin();
            }
            s / g as f64
        };
        let c = trap_coupling_chain(1, 3, 8);
        for (i, &link) in c.links.iter().enumerate() {
            let got = overlap(c.modes[i], 3, c.modes[i + 1]);
            assert!((got - link).abs() < 1e-6, "link {i}: {got} vs {link}");
        }
        // termination: nothing below mode N
        assert!(overlap(3, 3, 1).abs() < 1e-6);
        assert!((overlap(3, 3, 6) - 0.5).abs() < 1e-6);
    }
}
