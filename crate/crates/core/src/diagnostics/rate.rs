//! Geometric-rate fits of `‖x^k − x̄‖` or `f(x^k) − f*`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{distance, Vector};
use crate::trace::SolverTrace;

use super::fit::ols;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    /// Every consecutive ratio in the window is below one.
    QLinear,
    /// Only the geometric envelope decreases.
    RLinear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFitResult {
    pub rho_hat: f64,
    /// `None` when the fit is too poor or `ρ̂ ≥ 1`.
    pub kind: Option<RateKind>,
    pub r_squared: f64,
    pub window: (usize, usize),
    pub points: usize,
}

impl RateFitResult {
    pub fn is_linear(&self) -> bool {
        self.kind.is_some()
    }
}

#[derive(Clone, Copy, Debug)]
pub enum RateReference<'a> {
    /// Fit `‖x^k − x̄‖`.
    Point(&'a Vector),
    /// Fit `f(x^k) − f*`.
    Objective(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateFitOptions {
    /// Fraction of the log-range of the error sequence, counted from its
    /// smallest value, that the fitting window covers.
    pub tail_fraction: f64,
    pub min_points: usize,
    /// Errors at or below this value end the usable sequence. Defaults
    /// depend on the reference.
    pub floor: Option<f64>,
    pub r2_threshold: f64,
}

impl Default for RateFitOptions {
    fn default() -> Self {
        RateFitOptions {
            tail_fraction: 0.6,
            min_points: 5,
            floor: None,
            r2_threshold: 0.9,
        }
    }
}

pub fn fit_linear_rate(trace: &SolverTrace, reference: RateReference<'_>) -> Result<RateFitResult> {
    fit_linear_rate_with(trace, reference, &RateFitOptions::default())
}

pub fn fit_linear_rate_with(
    trace: &SolverTrace,
    reference: RateReference<'_>,
    opts: &RateFitOptions,
) -> Result<RateFitResult> {
    if !trace.converged {
        return Err(Error::NotApplicable("the trace did not converge".into()));
    }
    let (seq, default_floor): (Vec<f64>, f64) = match reference {
        RateReference::Point(xbar) => {
            if trace.iterates.len() != trace.len() {
                return Err(Error::InsufficientData("the trace carries no iterates".into()));
            }
            let scale = xbar.dot(xbar).sqrt().max(1.0);
            (trace.iterates.iter().map(|x| distance(x, xbar)).collect(), 1e-8 * scale)
        }
        RateReference::Objective(f_star) => (
            trace.objectives.iter().map(|f| f - f_star).collect(),
            1e3 * f64::EPSILON * f_star.abs().max(1.0),
        ),
    };
    fit_geometric(&seq, opts.floor.unwrap_or(default_floor), opts)
}

/// Fits `log e_k ≈ k·log ρ + c` on the tail of `seq`, up to the first entry
/// at or below `floor`.
pub fn fit_geometric(seq: &[f64], floor: f64, opts: &RateFitOptions) -> Result<RateFitResult> {
    if !(opts.tail_fraction > 0.0 && opts.tail_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "tail fraction must lie in (0, 1], got {}",
            opts.tail_fraction
        )));
    }
    let end = seq.iter().position(|e| !(*e > floor && e.is_finite())).unwrap_or(seq.len());
    let min_points = opts.min_points.max(3);
    if end < min_points {
        return Err(Error::InsufficientData(format!(
            "{end} errors above the floor {floor:e}, need at least {min_points}"
        )));
    }
    let logs: Vec<f64> = seq[..end].iter().map(|e| e.ln()).collect();
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let cut = hi - (1.0 - opts.tail_fraction) * (hi - lo);
    let start = logs
        .iter()
        .position(|l| *l <= cut)
        .unwrap_or(0)
        .min(end - min_points);
    let xs: Vec<f64> = (start..end).map(|k| k as f64).collect();
    let fit = ols(&xs, &logs[start..end]).expect("window holds at least three distinct indices");
    let rho_hat = fit.slope.exp();
    let kind = if fit.r_squared >= opts.r2_threshold && rho_hat < 1.0 {
        if seq[start..end].windows(2).all(|w| w[1] < w[0]) {
            Some(RateKind::QLinear)
        } else {
            Some(RateKind::RLinear)
        }
    } else {
        None
    };
    Ok(RateFitResult {
        rho_hat,
        kind,
        r_squared: fit.r_squared,
        window: (start, end),
        points: end - start,
    })
}
