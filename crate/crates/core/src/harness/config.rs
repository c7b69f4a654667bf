//! Experiment configuration: a flat TOML table layered over a preset.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::LossKind;
use crate::regularizers::GroupNorm;

use super::presets;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    #[default]
    L1,
    Scad,
    Mcp,
    L0Ball,
    SparseSimplex,
    TrimmedL1,
    GroupBall,
    Zero,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Pg,
    Ipiano,
}

/// One experiment. Every key is optional in a file; missing keys take the
/// values of the preset (or of [`ProblemConfig::default`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: String,
    pub seed: u64,

    pub loss: LossKind,
    pub m: usize,
    pub n: usize,
    /// CSV with one row `a_i1, …, a_in, b_i` per observation. Replaces the
    /// generated `A`, `b`, and overrides `m`, `n`.
    pub data_path: Option<PathBuf>,
    /// Nonzeros of the planted signal.
    pub sparsity: usize,
    pub noise: f64,
    /// Box radius for the Poisson loss.
    pub box_radius: Option<f64>,

    pub regularizer: RegularizerKind,
    /// `μ` (or `λ` for SCAD and MCP) as a multiple of `‖∇h(0)‖_∞`.
    pub mu_factor: f64,
    pub theta: f64,
    pub trim_gamma: f64,
    pub trim_k: usize,
    /// Sparsity level of the cardinality constraints.
    pub r: usize,
    pub group_size: usize,
    pub group_norm: GroupNorm,
    /// Ball radius as a multiple of the planted signal's group norm.
    pub sigma_factor: f64,

    pub solver: SolverKind,
    /// Constant PG step; `None` uses `0.99/L`.
    pub step: Option<f64>,
    pub beta: f64,
    /// iPiano step; `None` uses `0.99·2(1 − β)/L`.
    pub alpha: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,

    pub record_subgrad: bool,
    pub fit_kl: bool,
    pub fit_rate: bool,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            name: "custom".into(),
            seed: 0,
            loss: LossKind::LeastSquares,
            m: 30,
            n: 50,
            data_path: None,
            sparsity: 5,
            noise: 0.01,
            box_radius: None,
            regularizer: RegularizerKind::L1,
            mu_factor: 0.1,
            theta: 3.7,
            trim_gamma: 1.0,
            trim_k: 5,
            r: 5,
            group_size: 5,
            group_norm: GroupNorm::L2,
            sigma_factor: 0.5,
            solver: SolverKind::Pg,
            step: None,
            beta: 0.5,
            alpha: None,
            max_iters: 20_000,
            tol: 1e-10,
            record_subgrad: true,
            fit_kl: true,
            fit_rate: true,
        }
    }
}

/// Command-line overrides, applied last.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
}

fn invalid(msg: String) -> Error {
    Error::Config(msg)
}

impl ProblemConfig {
    /// Layers `preset`, then the file (whose own `preset` key is used when
    /// `preset` is `None`), then `overrides`, and validates the result.
    pub fn load(preset: Option<&str>, file: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut table = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::parse(path.display().to_string(), e))?
            }
            None => toml::Table::new(),
        };
        let file_preset = match table.remove("preset") {
            Some(toml::Value::String(s)) => Some(s),
            Some(other) => return Err(invalid(format!("preset must be a string, got {other}"))),
            None => None,
        };
        let base = match preset.map(str::to_owned).or(file_preset) {
            Some(name) => presets::preset(&name)?,
            None => ProblemConfig::default(),
        };
        let mut cfg = base.overlay(table)?;
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Replaces the keys present in `table`.
    pub fn overlay(&self, table: toml::Table) -> Result<Self> {
        let mut merged = toml::Table::try_from(self).map_err(|e| Error::parse("configuration", e))?;
        merged.extend(table);
        merged.try_into().map_err(|e| Error::parse("configuration", e))
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if let Some(it) = overrides.max_iters {
            self.max_iters = it;
        }
        if let Some(tol) = overrides.tol {
            self.tol = tol;
        }
    }

    /// Parameter windows that do not depend on generated data.
    pub fn validate(&self) -> Result<()> {
        if self.data_path.is_none() && (self.m == 0 || self.n == 0) {
            return Err(invalid(format!("dimensions must be positive, got m = {}, n = {}", self.m, self.n)));
        }
        if self.data_path.is_none() && self.loss != LossKind::Zero && (self.sparsity == 0 || self.sparsity > self.n) {
            return Err(invalid(format!(
                "planted sparsity must lie in 1..=n, got {} with n = {}",
                self.sparsity, self.n
            )));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(invalid(format!("noise must be a nonnegative real, got {}", self.noise)));
        }
        if self.loss == LossKind::Poisson && !self.box_radius.is_some_and(|r| r > 0.0 && r.is_finite()) {
            return Err(invalid("the Poisson loss requires a positive box_radius".into()));
        }
        let uses_mu = matches!(
            self.regularizer,
            RegularizerKind::L1 | RegularizerKind::Scad | RegularizerKind::Mcp | RegularizerKind::TrimmedL1
        );
        if uses_mu && !(self.mu_factor > 0.0 && self.mu_factor.is_finite()) {
            return Err(invalid(format!("mu_factor must be positive, got {}", self.mu_factor)));
        }
        match self.regularizer {
            RegularizerKind::Scad if !(self.theta > 2.0 && self.theta.is_finite()) => {
                return Err(invalid(format!("SCAD requires theta > 2, got {}", self.theta)));
            }
            RegularizerKind::Mcp if !(self.theta > 0.0 && self.theta.is_finite()) => {
                return Err(invalid(format!("MCP requires theta > 0, got {}", self.theta)));
            }
            RegularizerKind::TrimmedL1 if !(self.trim_gamma > 0.0 && self.trim_gamma <= 1.0) => {
                return Err(invalid(format!("trim_gamma must lie in (0, 1], got {}", self.trim_gamma)));
            }
            RegularizerKind::TrimmedL1 if self.data_path.is_none() && self.trim_k > self.n => {
                return Err(invalid(format!("trim_k must not exceed n, got {} with n = {}", self.trim_k, self.n)));
            }
            RegularizerKind::L0Ball | RegularizerKind::SparseSimplex if self.r == 0 => {
                return Err(invalid("sparsity level r must be at least 1".into()));
            }
            RegularizerKind::GroupBall if self.group_size == 0 => {
                return Err(invalid("group_size must be positive".into()));
            }
            RegularizerKind::GroupBall if !(self.sigma_factor > 0.0 && self.sigma_factor.is_finite()) => {
                return Err(invalid(format!("sigma_factor must be positive, got {}", self.sigma_factor)));
            }
            _ => {}
        }
        match self.solver {
            SolverKind::Pg => {
                if let Some(step) = self.step {
                    if !(step > 0.0 && step.is_finite()) {
                        return Err(invalid(format!("step must be positive, got {step}")));
                    }
                }
            }
            SolverKind::Ipiano => {
                if !(0.0..1.0).contains(&self.beta) {
                    return Err(invalid(format!("beta must lie in [0, 1), got {}", self.beta)));
                }
                if !matches!(
                    self.regularizer,
                    RegularizerKind::L1 | RegularizerKind::GroupBall | RegularizerKind::Zero
                ) {
                    return Err(invalid("iPiano requires a convex regularizer".into()));
                }
                if self.loss == LossKind::Poisson {
                    return Err(invalid("iPiano does not support the Poisson loss".into()));
                }
            }
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(invalid(format!("tol must be a nonnegative real, got {}", self.tol)));
        }
        Ok(())
    }
}
