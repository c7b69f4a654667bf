//! Grid check of `dist(x, 𝓧) ≤ c·‖prox_P(x − ∇h(x)) − x‖`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::CompositeObjective;
use crate::solvers::{estimate_stationary_set_from_grid, Grid};

/// Residuals at or below this value count as zero.
pub const ZERO_RESIDUAL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundReport {
    pub samples: usize,
    /// Samples entering the supremum.
    pub used: usize,
    pub skipped_zero_residual: usize,
    /// Samples with `f(x) > ζ` or residual `≥ ε`.
    pub skipped_level: usize,
    /// `sup dist(x, 𝓧)/residual` over the used samples.
    pub max_ratio: Option<f64>,
    pub epsilon_used: f64,
    pub zeta_used: f64,
    pub stationary_points: usize,
    pub continuum: bool,
}

/// Evaluates the ratio on every grid point with `f(x) ≤ ζ` and unit-step
/// residual below `ε`; either bound may be `+∞`.
pub fn check_error_bound(obj: &CompositeObjective, grid: &Grid, zeta: f64, epsilon: f64) -> Result<ErrorBoundReport> {
    if zeta.is_nan() || epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Config(format!("invalid level bounds ζ = {zeta}, ε = {epsilon}")));
    }
    crate::linalg::check_dim(obj.dim(), grid.dim())?;
    let evals: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let r = obj.prox_residual(&x, 1.0).unwrap_or(f64::INFINITY);
            let f = obj.evaluate(&x).map(|v| v.to_f64()).unwrap_or(f64::INFINITY);
            (r, f)
        })
        .collect();
    let residuals: Vec<f64> = evals.iter().map(|e| e.0).collect();
    let set = estimate_stationary_set_from_grid(obj, grid, &residuals)?;
    if set.is_empty() {
        return Err(Error::NotApplicable("no stationary point inside the grid box".into()));
    }
    let mut report = ErrorBoundReport {
        samples: grid.len(),
        used: 0,
        skipped_zero_residual: 0,
        skipped_level: 0,
        max_ratio: None,
        epsilon_used: epsilon,
        zeta_used: zeta,
        stationary_points: set.points.len(),
        continuum: set.continuum,
    };
    for (i, &(r, f)) in evals.iter().enumerate() {
        if r <= ZERO_RESIDUAL {
            report.skipped_zero_residual += 1;
        } else if f > zeta || r >= epsilon {
            report.skipped_level += 1;
        } else {
            let ratio = set.distance_to(&grid.point(i)) / r;
            report.used += 1;
            report.max_ratio = Some(report.max_ratio.map_or(ratio, |m: f64| m.max(ratio)));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::losses::SmoothLoss;
    use crate::regularizers::Regularizer;
    use ndarray::array;

    #[test]
    fn one_dimensional_lasso() {
        // Residual and distance both equal |x − 1|.
        let obj = CompositeObjective::new(
            SmoothLoss::least_squares(Matrix::eye(1), array![2.0]).unwrap(),
            Regularizer::L1 { mu: 1.0 },
        )
        .unwrap();
        let grid = Grid::new(vec![(-2.0, 4.0)], 200).unwrap();
        let rep = check_error_bound(&obj, &grid, f64::INFINITY, f64::INFINITY).unwrap();
        let m = rep.max_ratio.unwrap();
        assert!(m <= 3.0 && (m - 1.0).abs() < 1e-6, "{rep:?}");
        assert_eq!(rep.used, 200);
    }

    #[test]
    fn strongly_convex_quadratic() {
        // h = ½·σ(x − 2)² with σ = 1/4: residual = σ|x − 2|.
        let obj = CompositeObjective::new(
            SmoothLoss::least_squares(array![[0.5]], array![1.0]).unwrap(),
            Regularizer::Zero,
        )
        .unwrap();
        let grid = Grid::new(vec![(-1.0, 5.0)], 301).unwrap();
        let rep = check_error_bound(&obj, &grid, f64::INFINITY, f64::INFINITY).unwrap();
        assert!((rep.max_ratio.unwrap() - 4.0).abs() < 1e-6, "{rep:?}");
    }

    #[test]
    fn level_bounds_exclude_samples() {
        let obj = CompositeObjective::new(
            SmoothLoss::least_squares(Matrix::eye(1), array![2.0]).unwrap(),
            Regularizer::L1 { mu: 1.0 },
        )
        .unwrap();
        let grid = Grid::new(vec![(-2.0, 4.0)], 200).unwrap();
        let rep = check_error_bound(&obj, &grid, f64::INFINITY, 0.5).unwrap();
        assert!(rep.skipped_level > 0 && rep.used + rep.skipped_level == 200);
    }

    #[test]
    fn zero_objective_skips_everything() {
        let obj = CompositeObjective::new(SmoothLoss::zero(2), Regularizer::Zero).unwrap();
        let grid = Grid::new(vec![(-1.0, 1.0), (-1.0, 1.0)], 21).unwrap();
        let rep = check_error_bound(&obj, &grid, f64::INFINITY, f64::INFINITY).unwrap();
        assert_eq!(rep.skipped_zero_residual, rep.samples);
        assert_eq!(rep.max_ratio, None);
        assert!(rep.continuum);
    }
}
