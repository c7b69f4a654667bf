use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::objective::CompositeObjective;
use crate::trace::{SolverTrace, StoppingMeasure};

use super::{check_tol, pg_forward, Driver, STEP_SAFETY};

#[derive(Clone, Debug, PartialEq)]
pub struct IPianoConfig {
    pub beta: f64,
    /// `None` selects `0.99 · 2(1 − β)/L`.
    pub alpha: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
    pub record_subgrad: bool,
}

impl Default for IPianoConfig {
    fn default() -> Self {
        IPianoConfig {
            beta: 0.5,
            alpha: None,
            max_iters: 10_000,
            tol: 1e-10,
            record_subgrad: true,
        }
    }
}

impl IPianoConfig {
    /// Step `α` after checking `β ∈ [0, 1)` and `α ∈ (0, 2(1 − β)/L)`.
    pub fn resolve_alpha(&self, lipschitz: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::Config(format!("beta must lie in [0, 1), got {}", self.beta)));
        }
        let upper = 2.0 * (1.0 - self.beta) / lipschitz;
        let alpha = self.alpha.unwrap_or(STEP_SAFETY * upper);
        if !(alpha > 0.0 && alpha < upper) {
            return Err(Error::Config(format!(
                "alpha {alpha} lies outside (0, 2(1 - beta)/L) = (0, {upper})"
            )));
        }
        Ok(alpha)
    }

    /// `δ = (2 − β)/(2α) − L/2`.
    pub fn potential_weight(&self, alpha: f64, lipschitz: f64) -> f64 {
        (2.0 - self.beta) / (2.0 * alpha) - lipschitz / 2.0
    }
}

/// Constant-step iPiano,
/// `x^{k+1} = prox_{αP}(x^k − α∇h(x^k) + β(x^k − x^{k−1}))` with `x^{−1} = x^0`.
///
/// Records the potential `F_δ(x^k, x^{k−1}) = f(x^k) + δ‖x^k − x^{k−1}‖²`.
/// With `β = 0` the iteration and its trace coincide with [`super::run_pg`]
/// at constant step `α`.
pub fn run_ipiano(obj: &CompositeObjective, x0: &Vector, cfg: &IPianoConfig) -> Result<SolverTrace> {
    check_tol(cfg.tol)?;
    if !obj.reg().is_convex() {
        return Err(Error::Config(format!(
            "iPiano requires a convex regularizer; {} is nonconvex",
            obj.reg().name()
        )));
    }
    if !obj.smooth().is_globally_lipschitz() {
        return Err(Error::Config(
            "iPiano requires a loss with a globally Lipschitz gradient".into(),
        ));
    }
    let lipschitz = obj.smooth().lipschitz_bound()?;
    let alpha = cfg.resolve_alpha(lipschitz)?;
    let beta = cfg.beta;
    let driver = Driver {
        obj,
        max_iters: cfg.max_iters,
        tol: cfg.tol,
        record_subgrad: cfg.record_subgrad,
        stopping: StoppingMeasure::UnitStep,
        potential_weight: Some(cfg.potential_weight(alpha, lipschitz)),
    };
    driver.run(x0, |_k, x, prev, grad| {
        let mut point = pg_forward(x, grad, alpha);
        if beta != 0.0 {
            point.zip_mut_with(&(x - prev), |p, d| *p += beta * d);
        }
        (point, alpha)
    })
}
