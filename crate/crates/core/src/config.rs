//! Run configuration: a single flat TOML file, every key optional.
//!
//! Command-line flags override file values; the file overrides built-in
//! defaults. Configurations hold plain numbers only, so a parsed config
//! re-serializes bit-identically and a run is reproducible from its
//! provenance block alone.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::Model;
use crate::params::{Params, ParamsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    OneAtom,
    TwoAtom,
    Grid,
    DarkAnalyze,
    Sweep,
    Figure,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::OneAtom => "one-atom",
            Mode::TwoAtom => "two-atom",
            Mode::Grid => "grid",
            Mode::DarkAnalyze => "dark-analyze",
            Mode::Sweep => "sweep",
            Mode::Figure => "figure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(String),
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot serialize config: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

/// Everything a run needs, as one flat key set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub model: Model,
    pub omega: f64,
    pub kappa: f64,
    pub delta: f64,
    pub q1: f64,
    pub q2: f64,
    pub phi: f64,
    /// Momentum window half-width for lattice propagation.
    pub m_max: usize,
    /// Points per axis for position-space propagation.
    pub grid_size: usize,
    /// Split-step size for position-space propagation.
    pub dtau: f64,
    pub t_max: f64,
    pub samples: usize,
    pub tolerance: f64,
    /// Initial state: the delta seed when `basis` is absent, otherwise the
    /// four-site dark basis state |d_mn> with these indices.
    pub basis_m: Option<i32>,
    pub basis_n: Option<i32>,
    /// Trap runs: half-wavelengths of the cavity mode between the walls,
    /// and the mode number the candidate state is built from.
    pub trap_nu: Option<f64>,
    pub trap_mode: u32,
    pub figure: Option<String>,
    /// Sweep grids, expanded as a cartesian product in declaration order.
    pub sweep_omega: Vec<f64>,
    pub sweep_kappa: Vec<f64>,
    pub sweep_delta: Vec<f64>,
    /// Worker cap for sweeps; 0 means one per core.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::TwoAtom,
            model: Model::Full,
            omega: 50.0,
            kappa: 20.0,
            delta: 0.0,
            q1: 0.0,
            q2: 0.0,
            phi: 0.0,
            m_max: 16,
            grid_size: 64,
            dtau: 2.0e-4,
            t_max: 2.0,
            samples: 201,
            tolerance: 1.0e-9,
            basis_m: None,
            basis_n: None,
            trap_nu: None,
            trap_mode: 3,
            figure: None,
            sweep_omega: Vec::new(),
            sweep_kappa: Vec::new(),
            sweep_delta: Vec::new(),
            workers: 0,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(s)?)
    }

    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn params(&self) -> Result<Params, ConfigError> {
        Ok(Params::new(self.omega, self.kappa, self.delta, self.q1, self.q2, self.phi)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_file() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.mode, Mode::TwoAtom);
        assert_eq!(cfg.model, Model::Full);
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let mut cfg = RunConfig::default();
        // awkward values: non-representable decimals, tiny magnitudes
        cfg.omega = 0.1 + 0.2;
        cfg.kappa = 1.0e-300;
        cfg.delta = -3.141592653589793;
        cfg.tolerance = f64::MIN_POSITIVE;
        cfg.basis_m = Some(-3);
        cfg.basis_n = Some(7);
        cfg.trap_nu = Some(1.5000000000000002);
        cfg.sweep_omega = vec![25.0, 50.0, 100.0];
        cfg.figure = Some("3a".into());
        let text = cfg.to_toml_string().unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.omega.to_bits(), cfg.omega.to_bits());
        assert_eq!(back.kappa.to_bits(), cfg.kappa.to_bits());
        assert_eq!(back.tolerance.to_bits(), cfg.tolerance.to_bits());
        // and the re-serialization is byte-stable
        assert_eq!(back.to_toml_string().unwrap(), text);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("omga = 50.0").is_err());
    }

    #[test]
    fn partial_file_overrides_defaults() {
        let cfg = RunConfig::from_toml_str("mode = \"figure\"\nfigure = \"1a\"\nkappa = 0.0")
            .unwrap();
        assert_eq!(cfg.mode, Mode::Figure);
        assert_eq!(cfg.figure.as_deref(), Some("1a"));
        assert_eq!(cfg.kappa, 0.0);
        assert_eq!(cfg.omega, 50.0);
    }

    #[test]
    fn params_validation_flows_through() {
        let mut cfg = RunConfig::default();
        cfg.omega = -1.0;
        assert!(matches!(cfg.params(), Err(ConfigError::Params(_))));
    }
}
