use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::objective::CompositeObjective;
use crate::trace::SolverTrace;

use super::{check_tol, pg_forward, stopping_measure, Driver, STEP_SAFETY};

#[derive(Clone, Debug, PartialEq)]
pub enum StepRule {
    /// `γ = 0.99 / L`.
    Auto,
    Constant(f64),
    /// `γ_k` for iteration `k`; the last entry repeats once exhausted.
    Schedule(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PgConfig {
    pub step: StepRule,
    pub max_iters: usize,
    pub tol: f64,
    pub record_subgrad: bool,
}

impl Default for PgConfig {
    fn default() -> Self {
        PgConfig {
            step: StepRule::Auto,
            max_iters: 10_000,
            tol: 1e-10,
            record_subgrad: true,
        }
    }
}

impl PgConfig {
    /// Steps after resolving `Auto` against `L`, each checked against `(0, 1/L)`.
    pub fn resolve_steps(&self, lipschitz: f64) -> Result<Vec<f64>> {
        let steps = match &self.step {
            StepRule::Auto => vec![STEP_SAFETY / lipschitz],
            StepRule::Constant(g) => vec![*g],
            StepRule::Schedule(s) if s.is_empty() => {
                return Err(Error::Config("step schedule is empty".into()));
            }
            StepRule::Schedule(s) => s.clone(),
        };
        for g in &steps {
            if !(*g > 0.0 && g * lipschitz < 1.0) {
                return Err(Error::Config(format!(
                    "step {g} lies outside (0, 1/L) with L = {lipschitz}"
                )));
            }
        }
        Ok(steps)
    }
}

/// Proximal gradient: `x^{k+1} = prox_{γ_k P}(x^k − γ_k ∇h(x^k))`.
///
/// Stops when the stopping measure drops to `tol`. For convex and weakly
/// convex penalties with modulus below one that is the unit-step residual;
/// for the cardinality-type members it is `‖x^{k+1} − x^k‖`, whose zeros are
/// the fixed points of the iteration.
pub fn run_pg(obj: &CompositeObjective, x0: &Vector, cfg: &PgConfig) -> Result<SolverTrace> {
    check_tol(cfg.tol)?;
    let lipschitz = obj.smooth().lipschitz_bound()?;
    let steps = cfg.resolve_steps(lipschitz)?;
    let driver = Driver {
        obj,
        max_iters: cfg.max_iters,
        tol: cfg.tol,
        record_subgrad: cfg.record_subgrad,
        stopping: stopping_measure(obj),
        potential_weight: None,
    };
    driver.run(x0, |k, x, _prev, grad| {
        let gamma = steps[k.min(steps.len() - 1)];
        (pg_forward(x, grad, gamma), gamma)
    })
}
