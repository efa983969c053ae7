//! Experiment configuration: JSON file, command-line overrides, defaults and validation.

use std::path::Path;

use rosenlab::local_time::DEFAULT_KAPPA;
use rosenlab::{HurstParam, LocalTimeKind, Normalization, PathParams, QuadratureConfig, SpaceOffset};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaUnits {
    Absolute,
    /// Offsets are multiples of `√ε`.
    SqrtEps,
}

/// Every parameter of every subcommand. Unused fields are ignored by a
/// command but still echoed in its manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub h: f64,
    pub h2: Option<f64>,
    pub steps: usize,
    pub oversample: usize,
    pub horizon: f64,
    pub normalization: Normalization,
    pub seed: u64,
    pub reps: Option<usize>,
    pub workers: usize,
    pub kind: Option<LocalTimeKind>,
    pub eps: f64,
    pub ladder: Vec<f64>,
    pub y: f64,
    pub kappa: f64,
    pub derivative_order: u32,
    pub moment_order: u32,
    pub t_base: f64,
    pub deltas: Vec<f64>,
    pub delta_units: Option<DeltaUnits>,
    pub tolerance: Option<f64>,
    pub nodes: usize,
    pub omega: f64,
    pub grading: f64,
    pub truncation: usize,
    /// Right end of the single interval `[0, t]` when no step function is given.
    pub t: f64,
    pub breakpoints: Option<Vec<f64>>,
    pub coefficients: Option<Vec<f64>>,
    /// Draw a random step function with this many pieces from the master seed.
    pub random_pieces: Option<usize>,
    pub half_width: Option<f64>,
    pub density_step: f64,
    pub levels: usize,
    pub check: bool,
}

impl Default for Config {
    fn default() -> Self {
        let quad = QuadratureConfig::default();
        Config {
            h: 0.7,
            h2: None,
            steps: 256,
            oversample: 16,
            horizon: 1.0,
            normalization: Normalization::ExactVariance,
            seed: 0,
            reps: None,
            workers: 1,
            kind: None,
            eps: 0.05,
            ladder: vec![0.1, 0.05, 0.025, 0.0125],
            y: 0.0,
            kappa: DEFAULT_KAPPA,
            derivative_order: 0,
            moment_order: 2,
            t_base: 0.5,
            deltas: vec![0.05, 0.1, 0.2, 0.4],
            delta_units: None,
            tolerance: None,
            nodes: quad.nodes,
            omega: quad.omega,
            grading: quad.grading,
            truncation: 200,
            t: 1.0,
            breakpoints: None,
            coefficients: None,
            random_pieces: None,
            half_width: None,
            density_step: 0.01,
            levels: 3,
            check: false,
        }
    }
}

fn field(name: &str, err: impl std::fmt::Display) -> CliError {
    let msg = err.to_string();
    let msg = msg.strip_prefix("invalid input: ").unwrap_or(&msg);
    CliError::Invalid(format!("field '{name}': {msg}"))
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))
}

impl Config {
    pub fn hurst(&self) -> Result<HurstParam, CliError> {
        HurstParam::new(self.h).map_err(|e| field("h", e))
    }

    /// Second index; defaults to `h` for the two-process functionals.
    pub fn hurst2(&self) -> Result<HurstParam, CliError> {
        HurstParam::new(self.h2.unwrap_or(self.h)).map_err(|e| field("h2", e))
    }

    pub fn kind_or(&self, default: LocalTimeKind) -> LocalTimeKind {
        self.kind.unwrap_or(default)
    }

    pub fn quadrature(&self) -> Result<QuadratureConfig, CliError> {
        let q = QuadratureConfig {
            nodes: self.nodes,
            omega: self.omega,
            grading: self.grading,
        };
        q.validate().map_err(|e| field("nodes/omega/grading", e))?;
        if self.truncation == 0 || self.truncation > self.nodes {
            return Err(field("truncation", format!("{} must lie in 1..={}", self.truncation, self.nodes)));
        }
        Ok(q)
    }

    pub fn reps_or(&self, default: usize) -> usize {
        self.reps.unwrap_or(default)
    }

    pub fn path_params(&self, kind: LocalTimeKind) -> Result<PathParams, CliError> {
        let h1 = self.hurst()?;
        let h2 = if kind.needs_pair() { Some(self.hurst2()?) } else { None };
        if self.steps == 0 {
            return Err(field("steps", "must be at least 1"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(field("horizon", "must be positive"));
        }
        if self.oversample == 0 {
            return Err(field("oversample", "must be at least 1"));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(field("kappa", "must be positive"));
        }
        if self.derivative_order != 0 {
            return Err(field(
                "derivative_order",
                "only 0 is supported; derivative local times are not implemented",
            ));
        }
        if !self.y.is_finite() {
            return Err(field("y", "must be finite"));
        }
        let mut p = PathParams::new(kind, h1, h2, self.steps, self.seed);
        p.oversample = self.oversample;
        p.horizon = self.horizon;
        p.y = SpaceOffset(self.y);
        p.workers = self.workers;
        p.kappa = self.kappa;
        Ok(p)
    }

    /// Rejects `eps` under the resolution floor, reporting the floor.
    pub fn check_eps(&self, name: &str, eps: f64, params: &PathParams) -> Result<(), CliError> {
        params.check_eps(eps).map(|_| ()).map_err(|e| field(name, e))
    }

    pub fn validate_ladder(&self, params: &PathParams) -> Result<(), CliError> {
        if self.ladder.len() < 2 {
            return Err(field("ladder", "needs at least two rungs"));
        }
        if self.ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(field("ladder", "must be strictly decreasing"));
        }
        for &e in &self.ladder {
            self.check_eps("ladder", e, params)?;
        }
        Ok(())
    }

    pub fn validate_workers(&self) -> Result<(), CliError> {
        if self.workers == 0 {
            return Err(field("workers", "must be at least 1"));
        }
        Ok(())
    }
}
