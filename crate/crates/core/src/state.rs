//! Momentum-lattice state containers.
//!
//! A single excitation is shared between the internal state of the atoms and
//! one cavity photon, so the state splits into excitation channels, each
//! carrying a center-of-mass momentum amplitude. For two atoms the channels
//! are (atom 1 excited, atom 2 excited, photon) over a 2-D momentum lattice
//! (m, n); for one atom (atom excited, photon) over a 1-D lattice.
//!
//! The lattice is truncated to |m|, |n| ≤ m_max. Couplings shift one momentum
//! index by ±1 and preserve the parity pattern of (channel, m mod 2, n mod 2),
//! so the lattice decomposes into four closed classes.

use ndarray::{Array2, Array3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Excitation channel of the two-atom system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    /// Atom 1 excited, atom 2 in the ground state, no photon.
    ExcGnd,
    /// Atom 1 in the ground state, atom 2 excited, no photon.
    GndExc,
    /// Both atoms in the ground state, one cavity photon.
    Photon,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::ExcGnd, Channel::GndExc, Channel::Photon];

    /// Storage row: 0, 1, 2.
    pub fn index(self) -> usize {
        match self {
            Channel::ExcGnd => 0,
            Channel::GndExc => 1,
            Channel::Photon => 2,
        }
    }
}

/// A single lattice site: channel plus integer momentum offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeIndex {
    pub channel: Channel,
    pub m: i32,
    pub n: i32,
}

impl LatticeIndex {
    pub fn new(channel: Channel, m: i32, n: i32) -> Self {
        Self { channel, m, n }
    }
}

/// Parity class of a lattice site under the coupling stencil.
///
/// `A` is the class reachable from the bare initial state |e,g; m=n=0⟩:
/// channel 1 on (even, even), channel 2 on (odd, odd), channel 3 on
/// (odd, even). Everything else is `B`; dynamics never mixes the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityClass {
    A,
    B,
}

pub fn parity_class(idx: LatticeIndex) -> ParityClass {
    let me = idx.m.rem_euclid(2) == 0;
    let ne = idx.n.rem_euclid(2) == 0;
    let a = match idx.channel {
        Channel::ExcGnd => me && ne,
        Channel::GndExc => !me && !ne,
        Channel::Photon => !me && ne,
    };
    if a {
        ParityClass::A
    } else {
        ParityClass::B
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("momentum window m_max = {0} too small, need at least {1}")]
    WindowTooSmall(usize, usize),
}

/// Two-atom state: amplitudes C_{i,m,n} on (3, 2·m_max+1, 2·m_max+1).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoAtomState {
    m_max: usize,
    pub time: f64,
    amps: Array3<C64>,
}

impl TwoAtomState {
    pub fn zeros(m_max: usize) -> Self {
        let s = 2 * m_max + 1;
        Self { m_max, time: 0.0, amps: Array3::zeros((3, s, s)) }
    }

    /// Bare initial state of the reference runs: atom 1 excited, both atoms
    /// at rest, C_{1,0,0} = 1.
    pub fn delta_initial(m_max: usize) -> Result<Self, StateError> {
        if m_max < 2 {
            return Err(StateError::WindowTooSmall(m_max, 2));
        }
        let mut st = Self::zeros(m_max);
        st.set_amp(Channel::ExcGnd, 0, 0, C64::new(1.0, 0.0));
        Ok(st)
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn amps(&self) -> &Array3<C64> {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut Array3<C64> {
        &mut self.amps
    }

    pub(crate) fn from_amps(m_max: usize, time: f64, amps: Array3<C64>) -> Self {
        debug_assert_eq!(amps.dim(), (3, 2 * m_max + 1, 2 * m_max + 1));
        Self { m_max, time, amps }
    }

    #[inline]
    fn off(&self, k: i32) -> usize {
        debug_assert!(k.unsigned_abs() as usize <= self.m_max);
        (k + self.m_max as i32) as usize
    }

    pub fn contains(&self, m: i32, n: i32) -> bool {
        let mm = self.m_max as i32;
        m.abs() <= mm && n.abs() <= mm
    }

    pub fn amp(&self, channel: Channel, m: i32, n: i32) -> C64 {
        self.amps[[channel.index(), self.off(m), self.off(n)]]
    }

    pub fn set_amp(&mut self, channel: Channel, m: i32, n: i32, v: C64) {
        let (i, j, k) = (channel.index(), self.off(m), self.off(n));
        self.amps[[i, j, k]] = v;
    }

    /// Total excitation probability Σ |C|².
    pub fn survival_probability(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Population on the outermost shell |m| = m_max or |n| = m_max; the
    /// truncation monitor.
    pub fn boundary_population(&self) -> f64 {
        let s = 2 * self.m_max + 1;
        let mut p = 0.0;
        for i in 0..3 {
            for j in 0..s {
                for k in 0..s {
                    if j == 0 || j == s - 1 || k == 0 || k == s - 1 {
                        p += self.amps[[i, j, k]].norm_sqr();
                    }
                }
            }
        }
        p
    }

    /// Probability on parity class B; exactly conserved (zero for class-A
    /// initial data).
    pub fn class_b_population(&self) -> f64 {
        let mm = self.m_max as i32;
        let mut p = 0.0;
        for channel in Channel::ALL {
            for m in -mm..=mm {
                for n in -mm..=mm {
                    if parity_class(LatticeIndex::new(channel, m, n)) == ParityClass::B {
                        p += self.amp(channel, m, n).norm_sqr();
                    }
                }
            }
        }
        p
    }

    /// Momentum distribution of the first atom, P_m = Σ_{i,n} |C_{i,m,n}|²,
    /// indexed m = -m_max ..= m_max.
    pub fn first_atom_distribution(&self) -> Vec<f64> {
        let s = 2 * self.m_max + 1;
        let mut p = vec![0.0; s];
        for i in 0..3 {
            for j in 0..s {
                for k in 0..s {
                    p[j] += self.amps[[i, j, k]].norm_sqr();
                }
            }
        }
        p
    }
}

/// One-atom state: amplitudes on (2, 2·m_max+1); row 0 is the excited atom,
/// row 1 the photon channel (which carries damping and detuning).
#[derive(Debug, Clone, PartialEq)]
pub struct OneAtomState {
    m_max: usize,
    pub time: f64,
    amps: Array2<C64>,
}

impl OneAtomState {
    pub fn zeros(m_max: usize) -> Self {
        Self { m_max, time: 0.0, amps: Array2::zeros((2, 2 * m_max + 1)) }
    }

    /// Excited atom at rest: C_{1,0} = 1.
    pub fn delta_initial(m_max: usize) -> Result<Self, StateError> {
        if m_max < 2 {
            return Err(StateError::WindowTooSmall(m_max, 2));
        }
        let mut st = Self::zeros(m_max);
        let mm = st.m_max;
        st.amps[[0, mm]] = C64::new(1.0, 0.0);
        Ok(st)
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn amps(&self) -> &Array2<C64> {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut Array2<C64> {
        &mut self.amps
    }

    pub(crate) fn from_amps(m_max: usize, time: f64, amps: Array2<C64>) -> Self {
        debug_assert_eq!(amps.dim(), (2, 2 * m_max + 1));
        Self { m_max, time, amps }
    }

    pub fn amp(&self, row: usize, m: i32) -> C64 {
        self.amps[[row, (m + self.m_max as i32) as usize]]
    }

    pub fn survival_probability(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn boundary_population(&self) -> f64 {
        let s = 2 * self.m_max + 1;
        (0..2).map(|i| self.amps[[i, 0]].norm_sqr() + self.amps[[i, s - 1]].norm_sqr()).sum()
    }

    /// Momentum distribution P_m = |C_{1,m}|² + |C_{2,m}|².
    pub fn momentum_distribution(&self) -> Vec<f64> {
        let s = 2 * self.m_max + 1;
        (0..s).map(|j| self.amps[[0, j]].norm_sqr() + self.amps[[1, j]].norm_sqr()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_classes() {
        use Channel::*;
        assert_eq!(parity_class(LatticeIndex::new(ExcGnd, 0, 0)), ParityClass::A);
        assert_eq!(parity_class(LatticeIndex::new(ExcGnd, 2, -4)), ParityClass::A);
        assert_eq!(parity_class(LatticeIndex::new(GndExc, 1, 1)), ParityClass::A);
        assert_eq!(parity_class(LatticeIndex::new(GndExc, -3, 1)), ParityClass::A);
        assert_eq!(parity_class(LatticeIndex::new(Photon, 1, 0)), ParityClass::A);
        assert_eq!(parity_class(LatticeIndex::new(Photon, -1, 2)), ParityClass::A);
        // class B examples
        assert_eq!(parity_class(LatticeIndex::new(ExcGnd, 1, 0)), ParityClass::B);
        assert_eq!(parity_class(LatticeIndex::new(GndExc, 0, 0)), ParityClass::B);
        assert_eq!(parity_class(LatticeIndex::new(Photon, 0, 0)), ParityClass::B);
        assert_eq!(parity_class(LatticeIndex::new(Photon, 1, 1)), ParityClass::B);
    }

    #[test]
    fn delta_initial_two_atom() {
        assert_eq!(
            TwoAtomState::delta_initial(1),
            Err(StateError::WindowTooSmall(1, 2))
        );
        let st = TwoAtomState::delta_initial(4).unwrap();
        assert_eq!(st.amp(Channel::ExcGnd, 0, 0), C64::new(1.0, 0.0));
        assert_eq!(st.survival_probability(), 1.0);
        assert_eq!(st.class_b_population(), 0.0);
        assert_eq!(st.boundary_population(), 0.0);
    }

    #[test]
    fn distributions_count_all_channels() {
        let mut st = TwoAtomState::zeros(3);
        st.set_amp(Channel::ExcGnd, 2, 0, C64::new(0.5, 0.0));
        st.set_amp(Channel::GndExc, 2, 1, C64::new(0.0, 0.5));
        st.set_amp(Channel::Photon, -1, 0, C64::new(0.5, 0.5));
        let p = st.first_atom_distribution();
        assert_eq!(p[(2 + 3) as usize], 0.5);
        assert_eq!(p[(-1 + 3) as usize], 0.5);
        assert!((st.survival_probability() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_atom_delta() {
        let st = OneAtomState::delta_initial(8).unwrap();
        assert_eq!(st.amp(0, 0), C64::new(1.0, 0.0));
        assert_eq!(st.amp(1, 0), C64::new(0.0, 0.0));
        assert_eq!(st.survival_probability(), 1.0);
        assert_eq!(OneAtomState::delta_initial(0), Err(StateError::WindowTooSmall(0, 2)));
    }
}
