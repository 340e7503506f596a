//! Deterministic reproduction of the survey datasets.
//!
//! Each figure id maps to a pinned configuration (coupling, damping,
//! window, tolerance, time grid) and produces a long-format table
//! (τ, index, value). For the momentum-distribution figures the index is
//! the momentum component of the first atom; for the population and
//! survival figures it numbers the curves. Everything is seedless and
//! single-valued: rerunning a figure reproduces its file byte for byte.

use std::io::Write;

use thiserror::Error;

use crate::dark::DarkBasisState;
use crate::dynamics::{
    propagate_one_atom, propagate_two_atom, sample_grid, DynamicsError, Model,
};
use crate::grid::{rna_grid_evolve, GridError, PositionField};
use crate::params::Params;
use crate::state::{Channel, OneAtomState, StateError, TwoAtomState};

pub const FIGURE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    F1a,
    F1b,
    F1c,
    F1d,
    F2a,
    F2b,
    F2c,
    F2d,
    F3a,
    F3b,
    F4,
}

impl FigureId {
    pub const ALL: [FigureId; 11] = [
        FigureId::F1a,
        FigureId::F1b,
        FigureId::F1c,
        FigureId::F1d,
        FigureId::F2a,
        FigureId::F2b,
        FigureId::F2c,
        FigureId::F2d,
        FigureId::F3a,
        FigureId::F3b,
        FigureId::F4,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            FigureId::F1a => "1a",
            FigureId::F1b => "1b",
            FigureId::F1c => "1c",
            FigureId::F1d => "1d",
            FigureId::F2a => "2a",
            FigureId::F2b => "2b",
            FigureId::F2c => "2c",
            FigureId::F2d => "2d",
            FigureId::F3a => "3a",
            FigureId::F3b => "3b",
            FigureId::F4 => "4",
        }
    }
}

impl std::fmt::Display for FigureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Error)]
pub enum FigureError {
    #[error("unknown figure id {0:?}; valid ids: 1a-1d, 2a-2d, 3a, 3b, 4")]
    Unknown(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    State(#[from] StateError),
}

impl std::str::FromStr for FigureId {
    type Err = FigureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureId::ALL
            .iter()
            .copied()
            .find(|id| id.label() == s.to_ascii_lowercase())
            .ok_or_else(|| FigureError::Unknown(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub tau: f64,
    pub index: i32,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct FigureDataset {
    pub id: FigureId,
    pub meta: Vec<(String, String)>,
    pub rows: Vec<FigureRow>,
}

impl FigureDataset {
    /// Comment block of `# key = value` provenance lines, then the table.
    pub fn to_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "tau,index,value")?;
        for r in &self.rows {
            writeln!(w, "{:.16e},{},{:.16e}", r.tau, r.index, r.value)?;
        }
        Ok(())
    }

    pub fn finite(&self) -> bool {
        self.rows.iter().all(|r| r.tau.is_finite() && r.value.is_finite())
    }
}

fn meta_common(id: FigureId, p: &Params, model: Option<Model>) -> Vec<(String, String)> {
    let mut m = vec![
        ("figure".to_string(), id.label().to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("omega".to_string(), format!("{}", p.omega)),
        ("kappa".to_string(), format!("{}", p.kappa)),
        ("delta".to_string(), format!("{}", p.delta)),
        ("q1".to_string(), format!("{}", p.q1)),
        ("q2".to_string(), format!("{}", p.q2)),
        ("phi".to_string(), format!("{}", p.phi)),
        ("tolerance".to_string(), format!("{}", FIGURE_TOLERANCE)),
    ];
    if let Some(model) = model {
        m.push(("model".to_string(), model.to_string()));
    }
    m
}

/// Single-atom momentum distribution over time, delta seed.
fn one_atom_panel(id: FigureId, model: Model, kappa: f64, m_max: usize) -> Result<FigureDataset, FigureError> {
    let p = Params::resonant(50.0, kappa).expect("pinned parameters are valid");
    let init = OneAtomState::delta_initial(m_max)?;
    let times = sample_grid(0.0, 1.0, 101);
    let traj = propagate_one_atom(&p, model, &init, &times, FIGURE_TOLERANCE)?;
    let mut meta = meta_common(id, &p, Some(model));
    meta.push(("m_max".to_string(), m_max.to_string()));
    meta.push((
        "max_boundary_population".to_string(),
        format!("{:.3e}", traj.meta.max_boundary_population),
    ));
    let mut rows = Vec::new();
    for s in &traj.samples {
        let dist = s.momentum_distribution();
        for (j, &v) in dist.iter().enumerate() {
            rows.push(FigureRow { tau: s.time, index: j as i32 - m_max as i32, value: v });
        }
    }
    Ok(FigureDataset { id, meta, rows })
}

/// First-atom momentum marginal in the full two-atom model.
fn two_atom_marginal_full(id: FigureId, kappa: f64) -> Result<FigureDataset, FigureError> {
    let m_max = 32usize;
    let p = Params::resonant(50.0, kappa).expect("pinned parameters are valid");
    let init = TwoAtomState::delta_initial(m_max)?;
    let times = sample_grid(0.0, 1.0, 101);
    let traj = propagate_two_atom(&p, Model::Full, &init, &times, FIGURE_TOLERANCE)?;
    let mut meta = meta_common(id, &p, Some(Model::Full));
    meta.push(("m_max".to_string(), m_max.to_string()));
    meta.push((
        "max_boundary_population".to_string(),
        format!("{:.3e}", traj.meta.max_boundary_population),
    ));
    let mut rows = Vec::new();
    for s in &traj.samples {
        let dist = s.first_atom_distribution();
        for (j, &v) in dist.iter().enumerate() {
            rows.push(FigureRow { tau: s.time, index: j as i32 - m_max as i32, value: v });
        }
    }
    Ok(FigureDataset { id, meta, rows })
}

/// First-atom marginal without the kinetic term, from the exact pointwise
/// propagator on a position grid wide enough that no momentum content
/// reaches the window edge within the plotted time.
fn two_atom_marginal_rna(id: FigureId, kappa: f64) -> Result<FigureDataset, FigureError> {
    let g = 256usize;
    let m_max = 127usize;
    let p = Params::resonant(50.0, kappa).expect("pinned parameters are valid");
    let times = sample_grid(0.0, 1.0, 101);
    let mut field = PositionField::uniform_first_excited(g);
    let mut meta = meta_common(id, &p, Some(Model::Rna));
    meta.push(("grid_size".to_string(), g.to_string()));
    meta.push(("m_max".to_string(), m_max.to_string()));
    meta.push(("method".to_string(), "exact pointwise propagator".to_string()));
    let mut rows = Vec::new();
    for &t in &times {
        if t > field.time {
            field = rna_grid_evolve(&p, &field, t);
        }
        let lat = field.to_lattice(m_max)?;
        let dist = lat.first_atom_distribution();
        for (j, &v) in dist.iter().enumerate() {
            rows.push(FigureRow { tau: t, index: j as i32 - m_max as i32, value: v });
        }
    }
    Ok(FigureDataset { id, meta, rows })
}

/// Total survival (curve 1), the central mode plus its strongest side modes
/// (curve 2), and the central mode alone (curve 3).
fn mode_populations(id: FigureId, model: Model) -> Result<FigureDataset, FigureError> {
    const SIDE_MODES: [(Channel, i32, i32); 9] = [
        (Channel::ExcGnd, 0, 0),
        (Channel::ExcGnd, 0, 2),
        (Channel::ExcGnd, 0, -2),
        (Channel::ExcGnd, 2, 0),
        (Channel::ExcGnd, -2, 0),
        (Channel::GndExc, 1, 1),
        (Channel::GndExc, 1, -1),
        (Channel::GndExc, -1, 1),
        (Channel::GndExc, -1, -1),
    ];
    let m_max = 16usize;
    let p = Params::resonant(50.0, 20.0).expect("pinned parameters are valid");
    let init = TwoAtomState::delta_initial(m_max)?;
    let times = sample_grid(0.0, 2.0, 201);
    let traj = propagate_two_atom(&p, model, &init, &times, FIGURE_TOLERANCE)?;
    let mut meta = meta_common(id, &p, Some(model));
    meta.push(("m_max".to_string(), m_max.to_string()));
    meta.push((
        "max_boundary_population".to_string(),
        format!("{:.3e}", traj.meta.max_boundary_population),
    ));
    meta.push((
        "curves".to_string(),
        "1: survival; 2: central and strongest side modes; 3: central mode".to_string(),
    ));
    let mut rows = Vec::new();
    for s in &traj.samples {
        let central: f64 = s.amp(Channel::ExcGnd, 0, 0).norm_sqr();
        let modes: f64 = SIDE_MODES.iter().map(|&(c, m, n)| s.amp(c, m, n).norm_sqr()).sum();
        rows.push(FigureRow { tau: s.time, index: 1, value: s.survival_probability() });
        rows.push(FigureRow { tau: s.time, index: 2, value: modes });
        rows.push(FigureRow { tau: s.time, index: 3, value: central });
    }
    Ok(FigureDataset { id, meta, rows })
}

/// Survival of four-site dark basis states under the full model.
fn dark_survival() -> Result<FigureDataset, FigureError> {
    struct Curve {
        index: i32,
        basis: (i32, i32),
        kappa: f64,
        omega: f64,
        t_max: f64,
    }
    let curves = [
        Curve { index: 1, basis: (0, 0), kappa: 20.0, omega: 100.0, t_max: 2.0 },
        Curve { index: 2, basis: (0, 0), kappa: 100.0, omega: 50.0, t_max: 0.4 },
        Curve { index: 3, basis: (0, 0), kappa: 20.0, omega: 25.0, t_max: 2.0 },
        Curve { index: 4, basis: (0, 2), kappa: 20.0, omega: 50.0, t_max: 2.0 },
    ];
    let m_max = 12usize;
    let mut meta = vec![
        ("figure".to_string(), "4".to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("model".to_string(), Model::Full.to_string()),
        ("m_max".to_string(), m_max.to_string()),
        ("tolerance".to_string(), format!("{}", FIGURE_TOLERANCE)),
    ];
    let mut rows = Vec::new();
    for c in &curves {
        let p = Params::resonant(c.omega, c.kappa).expect("pinned parameters are valid");
        let init = DarkBasisState::new(c.basis.0, c.basis.1).to_state(m_max)?;
        let times = sample_grid(0.0, c.t_max, 201);
        let traj = propagate_two_atom(&p, Model::Full, &init, &times, FIGURE_TOLERANCE)?;
        meta.push((
            format!("curve{}", c.index),
            format!(
                "basis=({},{}) kappa={} omega={} t_max={} max_boundary={:.3e}",
                c.basis.0, c.basis.1, c.kappa, c.omega, c.t_max,
                traj.meta.max_boundary_population
            ),
        ));
        for s in &traj.samples {
            rows.push(FigureRow { tau: s.time, index: c.index, value: s.survival_probability() });
        }
    }
    Ok(FigureDataset { id: FigureId::F4, meta, rows })
}

pub fn run_figure(id: FigureId) -> Result<FigureDataset, FigureError> {
    match id {
        FigureId::F1a => one_atom_panel(id, Model::Rna, 0.0, 160),
        FigureId::F1b => one_atom_panel(id, Model::Full, 0.0, 32),
        FigureId::F1c => one_atom_panel(id, Model::Rna, 20.0, 160),
        FigureId::F1d => one_atom_panel(id, Model::Full, 20.0, 32),
        FigureId::F2a => two_atom_marginal_rna(id, 0.0),
        FigureId::F2b => two_atom_marginal_full(id, 0.0),
        FigureId::F2c => two_atom_marginal_rna(id, 20.0),
        FigureId::F2d => two_atom_marginal_full(id, 20.0),
        FigureId::F3a => mode_populations(id, Model::Rna),
        FigureId::F3b => mode_populations(id, Model::Full),
        FigureId::F4 => dark_survival(),
    }
}
