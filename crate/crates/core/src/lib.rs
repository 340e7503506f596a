//! Simulator and analysis toolkit for one or two two-level atoms coupled to
//! a single damped cavity mode, with the atomic center-of-mass motion kept
//! quantum. Everything is phrased in recoil units: times in 1/ω_rec,
//! rates in ω_rec, momenta in photon momenta.
//!
//! The library revolves around states that stay excited because the two
//! atoms interfere destructively in the cavity mode. It provides the
//! truncated momentum-lattice propagator for the full model, the exact
//! pointwise solution of the recoil-neglected model, position-space
//! split-step evolution for both ring and box boundaries, and the exact
//! momentum table of the asymptotic trapped state.

pub mod config;
pub mod dark;
pub mod dynamics;
pub mod export;
pub mod figures;
pub mod grid;
pub mod observables;
pub mod params;
pub mod rk45;
pub mod rna;
pub mod state;
pub mod sweep;

pub use config::{Mode, RunConfig};
pub use dark::{DarkBasisState, DarkTable, ExactDarkState};
pub use dynamics::{propagate_one_atom, propagate_two_atom, Model, Trajectory};
pub use figures::{run_figure, FigureDataset, FigureId};
pub use grid::{grid_evolve, rna_grid_evolve, Domain, PositionField};
pub use params::Params;
pub use state::{Channel, OneAtomState, TwoAtomState};
pub use sweep::{run_sweep, SweepGrid};
