//! The shipped gallery of experiments.

use crate::error::{Error, Result};
use crate::losses::LossKind;

use super::config::{ProblemConfig, RegularizerKind, SolverKind};

pub const PRESET_NAMES: [&str; 9] = [
    "lasso",
    "scad-ls",
    "mcp-ls",
    "logistic-l1",
    "l0-ball-ls",
    "sparse-simplex-ls",
    "trimmed-l1-ls",
    "group-ball-ls",
    "ipiano-lasso",
];

pub fn preset(name: &str) -> Result<ProblemConfig> {
    let base = ProblemConfig {
        name: name.to_owned(),
        ..ProblemConfig::default()
    };
    let cfg = match name {
        "lasso" => base,
        "scad-ls" => ProblemConfig {
            regularizer: RegularizerKind::Scad,
            theta: 3.7,
            ..base
        },
        "mcp-ls" => ProblemConfig {
            regularizer: RegularizerKind::Mcp,
            theta: 3.0,
            ..base
        },
        "logistic-l1" => ProblemConfig {
            loss: LossKind::Logistic,
            m: 100,
            noise: 0.1,
            max_iters: 50_000,
            ..base
        },
        "l0-ball-ls" => ProblemConfig {
            regularizer: RegularizerKind::L0Ball,
            r: 5,
            ..base
        },
        "sparse-simplex-ls" => ProblemConfig {
            regularizer: RegularizerKind::SparseSimplex,
            r: 5,
            ..base
        },
        "trimmed-l1-ls" => ProblemConfig {
            regularizer: RegularizerKind::TrimmedL1,
            trim_gamma: 1.0,
            trim_k: 5,
            ..base
        },
        "group-ball-ls" => ProblemConfig {
            regularizer: RegularizerKind::GroupBall,
            group_size: 5,
            sigma_factor: 0.5,
            ..base
        },
        "ipiano-lasso" => ProblemConfig {
            solver: SolverKind::Ipiano,
            beta: 0.5,
            ..base
        },
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?}; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(cfg)
}
