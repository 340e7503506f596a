//! Batch decay-rate surveys over a parameter grid.
//!
//! Rows are the cartesian product of the coupling, damping, and detuning
//! lists in row-major order (coupling outermost), each starting from the
//! same four-site dark basis state. Rows run concurrently but the output
//! preserves input order, and a failed row becomes an error entry rather
//! than aborting the batch, so a long survey survives one bad corner of
//! parameter space.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dark::DarkBasisState;
use crate::dynamics::{propagate_two_atom, sample_grid, Model};
use crate::observables::{fit_decay, plateau, survival_curve};
use crate::params::Params;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub omegas: Vec<f64>,
    pub kappas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub basis_m: i32,
    pub basis_n: i32,
    pub m_max: usize,
    pub t_max: f64,
    pub samples: usize,
    pub tolerance: f64,
}

impl SweepGrid {
    /// Rate survey defaults: long enough to fit the slow decays, wide
    /// enough to hold the basis sites with room to spare.
    pub fn new(omegas: Vec<f64>, kappas: Vec<f64>, deltas: Vec<f64>) -> Self {
        Self {
            omegas,
            kappas,
            deltas,
            basis_m: 0,
            basis_n: 0,
            m_max: 12,
            t_max: 2.0,
            samples: 201,
            tolerance: 1e-9,
        }
    }

    fn expand(&self) -> Vec<(f64, f64, f64)> {
        let mut points = Vec::new();
        for &omega in &self.omegas {
            for &kappa in &self.kappas {
                for &delta in &self.deltas {
                    points.push((omega, kappa, delta));
                }
            }
        }
        points
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    pub kappa: f64,
    pub delta: f64,
    pub basis_m: i32,
    pub basis_n: i32,
    pub plateau_survival: Option<f64>,
    pub decay_rate: Option<f64>,
    pub r_squared: Option<f64>,
    pub truncation_flagged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep grid is empty")]
    EmptyGrid,
}

fn run_point(grid: &SweepGrid, omega: f64, kappa: f64, delta: f64) -> SweepRow {
    let mut row = SweepRow {
        omega,
        kappa,
        delta,
        basis_m: grid.basis_m,
        basis_n: grid.basis_n,
        plateau_survival: None,
        decay_rate: None,
        r_squared: None,
        truncation_flagged: false,
        error: None,
    };
    let fail = |row: &mut SweepRow, e: String| {
        // keep the summary table machine-readable
        row.error = Some(e.replace(',', ";"));
    };
    let params = match Params::new(omega, kappa, delta, 0.0, 0.0, 0.0) {
        Ok(p) => p,
        Err(e) => {
            fail(&mut row, e.to_string());
            return row;
        }
    };
    let init = match DarkBasisState::new(grid.basis_m, grid.basis_n).to_state(grid.m_max) {
        Ok(s) => s,
        Err(e) => {
            fail(&mut row, e.to_string());
            return row;
        }
    };
    let times = sample_grid(0.0, grid.t_max, grid.samples.max(2));
    let traj = match propagate_two_atom(&params, Model::Full, &init, &times, grid.tolerance) {
        Ok(t) => t,
        Err(e) => {
            fail(&mut row, e.to_string());
            return row;
        }
    };
    row.truncation_flagged = traj.truncation_flagged();
    let curve = survival_curve(&traj);
    row.plateau_survival = plateau(&curve, grid.t_max / 4.0, 1e-4).map(|(_, v)| v);
    if kappa > 0.0 {
        if let Ok(fit) = fit_decay(&curve, kappa) {
            row.decay_rate = Some(fit.rate);
            row.r_squared = Some(fit.r_squared);
        }
    }
    row
}

/// Run every grid point; `workers` caps the thread count, 0 meaning one
/// per core. Output order is input order regardless of scheduling.
pub fn run_sweep(grid: &SweepGrid, workers: usize) -> Result<Vec<SweepRow>, SweepError> {
    let points = grid.expand();
    if points.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool construction");
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|&(omega, kappa, delta)| run_point(grid, omega, kappa, delta))
            .collect()
    }))
}

pub fn rows_to_csv<W: Write>(
    grid: &SweepGrid,
    rows: &[SweepRow],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "# m_max = {}", grid.m_max)?;
    writeln!(w, "# t_max = {}", grid.t_max)?;
    writeln!(w, "# samples = {}", grid.samples)?;
    writeln!(w, "# tolerance = {}", grid.tolerance)?;
    writeln!(
        w,
        "omega,kappa,delta,basis_m,basis_n,plateau_survival,decay_rate,r_squared,truncation_flagged,error"
    )?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for r in rows {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{},{},{},{},{},{},{}",
            r.omega,
            r.kappa,
            r.delta,
            r.basis_m,
            r.basis_n,
            opt(r.plateau_survival),
            opt(r.decay_rate),
            opt(r.r_squared),
            r.truncation_flagged,
            r.error.as_deref().unwrap_or_default()
        )?;
    }
    Ok(())
}
