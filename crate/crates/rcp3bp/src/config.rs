//! Experiment configuration: model parameters, Diophantine constants,
//! tolerances, grid sizes and the random seed, loadable from a plain
//! key-value file with per-key overrides.

use crate::collision::VDeltaParams;
use crate::dynamics::{ModelParams, RHO_DEFAULT, TAU_DEFAULT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value`")]
    Parse(usize),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("value for `{key}` invalid: {value}")]
    BadValue { key: String, value: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// All knobs of the desk-scale experiments.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    /// Mass ratio.
    pub mu: f64,
    /// Region / mollifier exponent (default 3/20).
    pub tau: f64,
    /// Inner-region scale (default 10).
    pub rho: f64,
    /// V_delta margin.
    pub delta: f64,
    /// Sector half-angle of the arrival arc.
    pub varpi: f64,
    /// Constant-type gamma; if unset, C mu^(1/20).
    pub gamma: Option<f64>,
    /// Ball constant C.
    pub c_ball: f64,
    /// Cap on the rotation-model collision-ball radius 4 C mu^tau; at
    /// desk-scale mu, the uncapped radius exceeds the whole circle and the
    /// rotation experiments degenerate.
    pub ball_radius_cap: f64,
    /// Integration tolerances.
    pub rtol: f64,
    pub atol: f64,
    pub event_t_tol: f64,
    /// Grid sizes.
    pub n_psi: usize,
    pub n_segment: usize,
    pub n_scan: usize,
    /// Time budget for the shooting search, in orbit periods.
    pub max_periods: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mu: 1e-4,
            tau: TAU_DEFAULT,
            rho: RHO_DEFAULT,
            delta: 0.1,
            varpi: 0.2,
            gamma: None,
            c_ball: 1.0,
            ball_radius_cap: 0.05,
            rtol: 1e-12,
            atol: 1e-12,
            event_t_tol: 1e-12,
            n_psi: 256,
            n_segment: 64,
            n_scan: 60,
            max_periods: 80.0,
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn with_mu(mu: f64) -> Self {
        Self {
            mu,
            ..Self::default()
        }
    }

    /// gamma, defaulting to C mu^(1/20).
    pub fn gamma(&self) -> f64 {
        self.gamma
            .unwrap_or_else(|| self.c_ball * self.mu.powf(1.0 / 20.0))
    }

    pub fn model_params(&self) -> Result<ModelParams, ConfigError> {
        ModelParams::new(self.mu, self.tau, self.rho)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn v_delta(&self) -> Result<VDeltaParams, ConfigError> {
        VDeltaParams::new(self.delta).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Check the structural invariants: region nesting and the sector
    /// angle range.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model_params()?;
        if !(self.varpi > 0.0 && self.varpi < std::f64::consts::FRAC_PI_2) {
            return Err(ConfigError::Invalid(format!(
                "varpi = {} outside (0, pi/2)",
                self.varpi
            )));
        }
        if !(self.delta > 0.0) {
            return Err(ConfigError::Invalid(format!("delta = {}", self.delta)));
        }
        Ok(())
    }

    /// Parse a plain key-value file: one `key = value` per line, `#`
    /// comments and blank lines ignored.
    pub fn from_kv_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Parse(idx + 1))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |key: &str, value: &str| ConfigError::BadValue {
            key: key.into(),
            value: value.into(),
        };
        macro_rules! parse {
            ($field:expr, $ty:ty) => {
                $field = value.parse::<$ty>().map_err(|_| bad(key, value))?
            };
        }
        match key {
            "mu" => parse!(self.mu, f64),
            "tau" => parse!(self.tau, f64),
            "rho" => parse!(self.rho, f64),
            "delta" => parse!(self.delta, f64),
            "varpi" => parse!(self.varpi, f64),
            "gamma" => self.gamma = Some(value.parse().map_err(|_| bad(key, value))?),
            "c_ball" => parse!(self.c_ball, f64),
            "ball_radius_cap" => parse!(self.ball_radius_cap, f64),
            "rtol" => parse!(self.rtol, f64),
            "atol" => parse!(self.atol, f64),
            "event_t_tol" => parse!(self.event_t_tol, f64),
            "n_psi" => parse!(self.n_psi, usize),
            "n_segment" => parse!(self.n_segment, usize),
            "n_scan" => parse!(self.n_scan, usize),
            "max_periods" => parse!(self.max_periods, f64),
            "seed" => parse!(self.seed, u64),
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }
}
