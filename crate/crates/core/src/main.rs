//! Command-line front end.
//!
//! Subcommands: `simulate` (momentum-lattice propagation), `grid`
//! (position-space split-step), `dark` (asymptotic table and decay
//! estimates), `figure` (pinned survey datasets), `sweep` (batch rate
//! surveys). A flat TOML config seeds every run; flags override file
//! values, which override built-in defaults. All output is deterministic:
//! the same invocation produces the same bytes.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 numerical failure.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cavity_dark::config::{ConfigError, RunConfig};
use cavity_dark::dark::{decay_rate_estimate, DarkBasisState, DarkError, DarkTable};
use cavity_dark::dynamics::{sample_grid, DynamicsError, Model};
use cavity_dark::export::{self, ExportError};
use cavity_dark::figures::{run_figure, FigureError, FigureId};
use cavity_dark::grid::{grid_evolve, rna_grid_evolve, GridError, PositionField};
use cavity_dark::params::ParamsError;
use cavity_dark::state::{OneAtomState, StateError, TwoAtomState};
use cavity_dark::sweep::{rows_to_csv, run_sweep, SweepError, SweepGrid};
use cavity_dark::{propagate_one_atom, propagate_two_atom};

const WORKER_CAP_ENV: &str = "CAVITY_DARK_MAX_WORKERS";

#[derive(Parser)]
#[command(name = "cavity-dark", version, about = "Coupled atom-cavity lattice dynamics and dark-state analysis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Propagate the coupled momentum-lattice equations
    Simulate(SimulateArgs),
    /// Split-step propagation of position-space fields (ring or trap)
    Grid(GridArgs),
    /// Exact asymptotic dark-state table and decay estimates
    Dark(DarkArgs),
    /// Reproduce a pinned figure dataset as CSV
    Figure(FigureArgs),
    /// Batch decay-rate survey over a parameter grid
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
    Bin,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat TOML config file; explicit flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Coupling g/2ω_rec
    #[arg(long)]
    omega: Option<f64>,
    /// Cavity damping κ/ω_rec
    #[arg(long)]
    kappa: Option<f64>,
    /// Detuning Δ/ω_rec
    #[arg(long)]
    delta: Option<f64>,
    /// Quasi-momentum of atom 1 in [0, 1)
    #[arg(long)]
    q1: Option<f64>,
    /// Quasi-momentum of atom 2 in [0, 1)
    #[arg(long)]
    q2: Option<f64>,
    /// Mode phase offset
    #[arg(long)]
    phi: Option<f64>,
    /// Drop the kinetic term (Raman-Nath regime)
    #[arg(long)]
    rna: bool,
    /// Momentum window half-width
    #[arg(long)]
    mmax: Option<usize>,
    /// Final time in recoil units
    #[arg(long)]
    tmax: Option<f64>,
    /// Number of samples, endpoints included
    #[arg(long)]
    samples: Option<usize>,
    /// Integrator tolerance (error per unit step)
    #[arg(long)]
    tol: Option<f64>,
    /// Output path, '-' for stdout
    #[arg(long, default_value = "-")]
    out: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutFormat,
}

impl CommonArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.omega {
            cfg.omega = v;
        }
        if let Some(v) = self.kappa {
            cfg.kappa = v;
        }
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        if let Some(v) = self.q1 {
            cfg.q1 = v;
        }
        if let Some(v) = self.q2 {
            cfg.q2 = v;
        }
        if let Some(v) = self.phi {
            cfg.phi = v;
        }
        if self.rna {
            cfg.model = Model::Rna;
        }
        if let Some(v) = self.mmax {
            cfg.m_max = v;
        }
        if let Some(v) = self.tmax {
            cfg.t_max = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = self.tol {
            cfg.tolerance = v;
        }
        Ok(cfg)
    }

    fn writer(&self) -> Result<Box<dyn Write>, CliError> {
        make_writer(&self.out)
    }
}

fn make_writer(out: &str) -> Result<Box<dyn Write>, CliError> {
    if out == "-" {
        Ok(Box::new(std::io::stdout().lock()))
    } else {
        let f = std::fs::File::create(out)
            .map_err(|e| CliError::Io(format!("cannot create {out}: {e}")))?;
        Ok(Box::new(std::io::BufWriter::new(f)))
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Single atom instead of the two-atom problem
    #[arg(long)]
    one_atom: bool,
    /// Start from the four-site dark basis state |d_mn> instead of the
    /// delta seed (two-atom only)
    #[arg(long, requires = "basis_n")]
    basis_m: Option<i32>,
    #[arg(long, requires = "basis_m")]
    basis_n: Option<i32>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Grid points per axis
    #[arg(long)]
    gsize: Option<usize>,
    /// Split step in recoil time units
    #[arg(long)]
    dtau: Option<f64>,
    /// Run in a hard-wall trap with this many mode half-wavelengths
    #[arg(long)]
    trap_nu: Option<f64>,
    /// Mode number the trap candidate state is built from
    #[arg(long)]
    trap_mode: Option<u32>,
}

#[derive(Args)]
struct DarkArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Report the decay estimate for |d_mn> at (omega, kappa)
    #[arg(long, requires = "basis_n")]
    basis_m: Option<i32>,
    #[arg(long, requires = "basis_m")]
    basis_n: Option<i32>,
}

#[derive(Args)]
struct FigureArgs {
    /// Figure id: 1a-1d, 2a-2d, 3a, 3b, 4
    id: String,
    /// Output path, '-' for stdout
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Thread cap; 0 uses one per core
    #[arg(long)]
    workers: Option<usize>,
}

enum CliError {
    Io(String),
    Config(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(m) => CliError::Io(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ParamsError> for CliError {
    fn from(e: ParamsError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<StateError> for CliError {
    fn from(e: StateError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        // every grid error is a precondition on the requested run
        CliError::Config(e.to_string())
    }
}

impl From<DarkError> for CliError {
    fn from(e: DarkError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<FigureError> for CliError {
    fn from(e: FigureError) -> Self {
        match e {
            FigureError::Unknown(_) => CliError::Config(e.to_string()),
            FigureError::State(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<ExportError> for CliError {
    fn from(e: ExportError) -> Self {
        match e {
            ExportError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Io(other.to_string()),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Simulate(a) => simulate(a),
        Cmd::Grid(a) => grid_run(a),
        Cmd::Dark(a) => dark_run(a),
        Cmd::Figure(a) => figure_run(a),
        Cmd::Sweep(a) => sweep_run(a),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let cfg = args.common.config()?;
    let params = cfg.params()?;
    let times = sample_grid(0.0, cfg.t_max, cfg.samples.max(2));
    let basis = match (args.basis_m.or(cfg.basis_m), args.basis_n.or(cfg.basis_n)) {
        (Some(m), Some(n)) => Some((m, n)),
        _ => None,
    };
    if args.one_atom {
        if basis.is_some() {
            return Err(CliError::Config(
                "dark basis initial states exist only in the two-atom problem".into(),
            ));
        }
        let init = OneAtomState::delta_initial(cfg.m_max)?;
        let traj = propagate_one_atom(&params, cfg.model, &init, &times, cfg.tolerance)?;
        let mut w = args.common.writer()?;
        match args.common.format {
            OutFormat::Csv => {
                let boundary: Vec<f64> =
                    traj.samples.iter().map(|s| s.boundary_population()).collect();
                export::trajectory_to_csv(&traj, &params, &boundary, &mut w)?;
            }
            OutFormat::Json => export::trajectory_to_json(&traj, &params, &mut w)?,
            OutFormat::Bin => {
                return Err(CliError::Config(
                    "binary snapshots cover two-atom lattices and fields only".into(),
                ))
            }
        }
        return Ok(());
    }
    let init = match basis {
        Some((m, n)) => DarkBasisState::new(m, n).to_state(cfg.m_max)?,
        None => TwoAtomState::delta_initial(cfg.m_max)?,
    };
    let traj = propagate_two_atom(&params, cfg.model, &init, &times, cfg.tolerance)?;
    let mut w = args.common.writer()?;
    match args.common.format {
        OutFormat::Csv => {
            let boundary: Vec<f64> =
                traj.samples.iter().map(|s| s.boundary_population()).collect();
            export::trajectory_to_csv(&traj, &params, &boundary, &mut w)?;
        }
        OutFormat::Json => export::trajectory_to_json(&traj, &params, &mut w)?,
        OutFormat::Bin => export::state_to_bin(traj.last(), &mut w)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct GridRunDoc {
    schema_version: u32,
    domain: String,
    grid_size: usize,
    model: String,
    dtau: f64,
    omega: f64,
    kappa: f64,
    delta: f64,
    q1: f64,
    q2: f64,
    phi: f64,
    trap_mode: Option<u32>,
    tau: Vec<f64>,
    survival: Vec<f64>,
    darkness_residual: Vec<f64>,
}

fn grid_run(args: GridArgs) -> Result<(), CliError> {
    let mut cfg = args.common.config()?;
    if let Some(v) = args.gsize {
        cfg.grid_size = v;
    }
    if let Some(v) = args.dtau {
        cfg.dtau = v;
    }
    if let Some(v) = args.trap_nu {
        cfg.trap_nu = Some(v);
    }
    if let Some(v) = args.trap_mode {
        cfg.trap_mode = v;
    }
    let params = cfg.params()?;
    let mut field = match cfg.trap_nu {
        Some(nu) => PositionField::trap_dark_candidate(cfg.grid_size, cfg.trap_mode, nu),
        None => PositionField::uniform_first_excited(cfg.grid_size),
    };
    let times = sample_grid(0.0, cfg.t_max, cfg.samples.max(2));
    let mut tau = Vec::new();
    let mut survival = Vec::new();
    let mut residual = Vec::new();
    for &t in &times {
        if t > field.time {
            field = match cfg.model {
                Model::Full => grid_evolve(&params, &field, t, cfg.dtau)?,
                Model::Rna => rna_grid_evolve(&params, &field, t),
            };
        }
        tau.push(t);
        survival.push(field.norm_sq());
        residual.push(field.darkness_residual(&params));
    }
    let domain = match cfg.trap_nu {
        Some(nu) => format!("trap nu={nu}"),
        None => "periodic".to_string(),
    };
    let mut w = args.common.writer()?;
    match args.common.format {
        OutFormat::Csv => {
            let io = |e: std::io::Error| CliError::Io(e.to_string());
            writeln!(w, "# model = {}", cfg.model).map_err(io)?;
            writeln!(w, "# domain = {domain}").map_err(io)?;
            writeln!(w, "# grid_size = {}", cfg.grid_size).map_err(io)?;
            writeln!(w, "# dtau = {}", cfg.dtau).map_err(io)?;
            writeln!(w, "# omega = {}", params.omega).map_err(io)?;
            writeln!(w, "# kappa = {}", params.kappa).map_err(io)?;
            writeln!(w, "# delta = {}", params.delta).map_err(io)?;
            writeln!(w, "# q1 = {}", params.q1).map_err(io)?;
            writeln!(w, "# q2 = {}", params.q2).map_err(io)?;
            writeln!(w, "# phi = {}", params.phi).map_err(io)?;
            if cfg.trap_nu.is_some() {
                writeln!(w, "# trap_mode = {}", cfg.trap_mode).map_err(io)?;
            }
            writeln!(w, "tau,survival,darkness_residual").map_err(io)?;
            for i in 0..tau.len() {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", tau[i], survival[i], residual[i])
                    .map_err(io)?;
            }
        }
        OutFormat::Json => {
            let doc = GridRunDoc {
                schema_version: 1,
                domain,
                grid_size: cfg.grid_size,
                model: cfg.model.to_string(),
                dtau: cfg.dtau,
                omega: params.omega,
                kappa: params.kappa,
                delta: params.delta,
                q1: params.q1,
                q2: params.q2,
                phi: params.phi,
                trap_mode: cfg.trap_nu.is_some().then_some(cfg.trap_mode),
                tau,
                survival,
                darkness_residual: residual,
            };
            serde_json::to_writer_pretty(&mut w, &doc)
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        OutFormat::Bin => export::field_to_bin(&field, &mut w)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct DarkSummaryDoc {
    schema_version: u32,
    m_max: usize,
    central_amplitude: f64,
    partial_norm_diamond_2: f64,
    partial_norm_diamond_4: f64,
    window_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate: Option<EstimateDoc>,
}

#[derive(Serialize)]
struct EstimateDoc {
    basis_m: i32,
    basis_n: i32,
    omega: f64,
    kappa: f64,
    rate: f64,
    beyond_validity: bool,
}

fn dark_run(args: DarkArgs) -> Result<(), CliError> {
    let cfg = args.common.config()?;
    let table = DarkTable::build(cfg.m_max)?;
    let mut w = args.common.writer()?;
    match args.common.format {
        OutFormat::Csv => export::table_to_csv(&table, &mut w)?,
        OutFormat::Json => {
            let estimate = match (args.basis_m, args.basis_n) {
                (Some(m), Some(n)) => {
                    let params = cfg.params()?;
                    let est = decay_rate_estimate(&DarkBasisState::new(m, n), &params);
                    Some(EstimateDoc {
                        basis_m: m,
                        basis_n: n,
                        omega: params.omega,
                        kappa: params.kappa,
                        rate: est.rate,
                        beyond_validity: est.beyond_validity,
                    })
                }
                _ => None,
            };
            let doc = DarkSummaryDoc {
                schema_version: 1,
                m_max: table.m_max(),
                central_amplitude: table.amplitude(cavity_dark::Channel::ExcGnd, 0, 0),
                partial_norm_diamond_2: table.partial_norm_diamond(2),
                partial_norm_diamond_4: table.partial_norm_diamond(4),
                window_norm: table.window_norm(),
                estimate,
            };
            serde_json::to_writer_pretty(&mut w, &doc)
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        OutFormat::Bin => {
            return Err(CliError::Config(
                "the asymptotic table exports as csv or json".into(),
            ))
        }
    }
    Ok(())
}

fn figure_run(args: FigureArgs) -> Result<(), CliError> {
    let id: FigureId = args.id.parse()?;
    let ds = run_figure(id)?;
    let mut w = make_writer(&args.out)?;
    ds.to_csv(&mut w).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

fn worker_cap_from_env() -> Option<usize> {
    std::env::var(WORKER_CAP_ENV).ok().and_then(|v| v.parse::<usize>().ok())
}

fn resolve_workers(flag: Option<usize>, cfg: usize) -> usize {
    let requested = flag.unwrap_or(cfg);
    match worker_cap_from_env() {
        Some(cap) if cap > 0 => {
            if requested == 0 {
                cap
            } else {
                requested.min(cap)
            }
        }
        _ => requested,
    }
}

fn sweep_run(args: SweepArgs) -> Result<(), CliError> {
    let cfg = args.common.config()?;
    // a dimension without an explicit list collapses to the scalar value
    let axis = |list: &[f64], scalar: f64| {
        if list.is_empty() { vec![scalar] } else { list.to_vec() }
    };
    let mut grid = SweepGrid::new(
        axis(&cfg.sweep_omega, cfg.omega),
        axis(&cfg.sweep_kappa, cfg.kappa),
        axis(&cfg.sweep_delta, cfg.delta),
    );
    grid.basis_m = cfg.basis_m.unwrap_or(0);
    grid.basis_n = cfg.basis_n.unwrap_or(0);
    grid.m_max = cfg.m_max;
    grid.t_max = cfg.t_max;
    grid.samples = cfg.samples;
    grid.tolerance = cfg.tolerance;
    let workers = resolve_workers(args.workers, cfg.workers);
    let rows = run_sweep(&grid, workers)?;
    let mut w = args.common.writer()?;
    match args.common.format {
        OutFormat::Csv => {
            rows_to_csv(&grid, &rows, &mut w).map_err(|e| CliError::Io(e.to_string()))?
        }
        OutFormat::Json => {
            #[derive(Serialize)]
            struct SweepDoc<'a> {
                schema_version: u32,
                grid: &'a SweepGrid,
                rows: &'a [cavity_dark::sweep::SweepRow],
            }
            let doc = SweepDoc { schema_version: 1, grid: &grid, rows: &rows };
            serde_json::to_writer_pretty(&mut w, &doc)
                .map_err(|e| CliError::Io(e.to_string()))?
        }
        OutFormat::Bin => {
            return Err(CliError::Config("sweep summaries export as csv or json".into()))
        }
    }
    Ok(())
}
