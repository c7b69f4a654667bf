//! Proximal gradient and constant-step iPiano.

mod ipiano;
mod pg;
mod stationary;

pub use ipiano::{run_ipiano, IPianoConfig};
pub use pg::{run_pg, PgConfig, StepRule};
pub use stationary::{estimate_stationary_set, estimate_stationary_set_from_grid, Grid, StationarySet};

use crate::error::{Error, Result};
use crate::linalg::{distance, forward_point, Vector};
use crate::objective::CompositeObjective;
use crate::trace::{SolverTrace, StoppingMeasure, TraceRow};

/// Default fraction of the largest admissible step.
pub const STEP_SAFETY: f64 = 0.99;

pub(crate) fn stopping_measure(obj: &CompositeObjective) -> StoppingMeasure {
    if obj.reg().unit_step_residual_is_exact() {
        StoppingMeasure::UnitStep
    } else {
        StoppingMeasure::SolverStep
    }
}

/// Shared iteration loop. `forward` maps `(k, x^k, x^{k-1}, ∇h(x^k))` to the
/// forward point and step of iteration `k`.
pub(crate) struct Driver<'a> {
    pub obj: &'a CompositeObjective,
    pub max_iters: usize,
    pub tol: f64,
    pub record_subgrad: bool,
    pub stopping: StoppingMeasure,
    /// `δ` of the iPiano potential, when recorded.
    pub potential_weight: Option<f64>,
}

impl Driver<'_> {
    pub fn run(
        &self,
        x0: &Vector,
        mut forward: impl FnMut(usize, &Vector, &Vector, &Vector) -> (Vector, f64),
    ) -> Result<SolverTrace> {
        let obj = self.obj;
        let mut f = obj.check_start(x0)?;
        let mut trace = SolverTrace {
            stopping: self.stopping,
            ..SolverTrace::default()
        };
        let mut x = x0.clone();
        let mut prev = x0.clone();
        for k in 0..=self.max_iters {
            let grad = match obj.gradient(&x) {
                Ok(g) => g,
                Err(e) => return Err(escaped(k, e.to_string(), trace)),
            };
            let residual = obj.prox_residual_with_gradient(&x, &grad, 1.0)?;
            let (point, step) = forward(k, &x, &prev, &grad);
            let next = obj.reg().prox(&point, step)?;
            let step_residual = distance(&next, &x);
            let subgrad_dist = if self.record_subgrad {
                obj.reg().subgrad_distance(&x, &grad)?
            } else {
                None
            };
            let potential = self.potential_weight.map(|delta| {
                let d = distance(&x, &prev);
                f + delta * d * d
            });
            trace.push(TraceRow {
                iterate: x.clone(),
                objective: f,
                residual,
                step_residual,
                subgrad_dist,
                step,
                potential,
            });
            let measure = match self.stopping {
                StoppingMeasure::UnitStep => residual,
                StoppingMeasure::SolverStep => step_residual,
            };
            if measure <= self.tol {
                trace.converged = true;
                break;
            }
            if k == self.max_iters {
                break;
            }
            if !obj.smooth().in_box(&next) {
                return Err(escaped(k + 1, "iterate left the loss box".into(), trace));
            }
            f = match obj.evaluate(&next) {
                Ok(v) => match v.finite() {
                    Some(v) => v,
                    None => return Err(escaped(k + 1, "objective is infinite".into(), trace)),
                },
                Err(e) => return Err(escaped(k + 1, e.to_string(), trace)),
            };
            prev = std::mem::replace(&mut x, next);
        }
        Ok(trace)
    }
}

fn escaped(iteration: usize, reason: String, partial: SolverTrace) -> Error {
    Error::IterateEscaped {
        iteration,
        reason,
        partial: Box::new(partial),
    }
}

pub(crate) fn pg_forward(x: &Vector, grad: &Vector, step: f64) -> Vector {
    forward_point(x, grad, step)
}

pub(crate) fn check_tol(tol: f64) -> Result<()> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("tolerance must be a nonnegative real, got {tol}")))
    }
}
