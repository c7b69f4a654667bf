//! The composite objective `f = h + P`.

use crate::error::{Error, Result};
use crate::linalg::{check_dim, distance, forward_point, ExtReal, Vector};
use crate::losses::SmoothLoss;
use crate::regularizers::Regularizer;

#[derive(Clone, Debug)]
pub struct CompositeObjective {
    smooth: SmoothLoss,
    reg: Regularizer,
}

impl CompositeObjective {
    pub fn new(smooth: SmoothLoss, reg: Regularizer) -> Result<Self> {
        reg.validate()?;
        reg.check_dim(smooth.dim())?;
        Ok(CompositeObjective { smooth, reg })
    }

    pub fn smooth(&self) -> &SmoothLoss {
        &self.smooth
    }

    pub fn reg(&self) -> &Regularizer {
        &self.reg
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    /// `h(x) + P(x)`; `+∞` exactly when an indicator constraint fails.
    pub fn evaluate(&self, x: &Vector) -> Result<ExtReal> {
        check_dim(self.dim(), x.len())?;
        let p = self.reg.value(x)?;
        if !p.is_finite() {
            return Ok(ExtReal::Infinity);
        }
        Ok(ExtReal::Finite(self.smooth.value(x)?) + p)
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        self.smooth.gradient(x)
    }

    /// `‖prox_{step·P}(x − step·∇h(x)) − x‖`.
    pub fn prox_residual(&self, x: &Vector, step: f64) -> Result<f64> {
        let g = self.gradient(x)?;
        self.prox_residual_with_gradient(x, &g, step)
    }

    pub(crate) fn prox_residual_with_gradient(&self, x: &Vector, g: &Vector, step: f64) -> Result<f64> {
        let p = self.reg.prox(&forward_point(x, g, step), step)?;
        Ok(distance(&p, x))
    }

    /// `dist(0, ∇h(x) + ∂P(x))`, or `None` where the regularizer has no exact formula.
    pub fn subgrad_distance(&self, x: &Vector) -> Result<Option<f64>> {
        let g = self.gradient(x)?;
        self.reg.subgrad_distance(x, &g)
    }

    /// Rejects starting points outside `dom f` or the configured loss box.
    pub(crate) fn check_start(&self, x0: &Vector) -> Result<f64> {
        check_dim(self.dim(), x0.len())?;
        crate::linalg::ensure_finite(x0, "starting point")?;
        if !self.smooth.in_box(x0) {
            return Err(Error::Domain("starting point lies outside the loss box".into()));
        }
        self.evaluate(x0)?
            .finite()
            .ok_or_else(|| Error::Domain("starting point lies outside dom f".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use ndarray::array;

    #[test]
    fn evaluate_sums_both_parts() {
        let obj = CompositeObjective::new(
            SmoothLoss::least_squares(Matrix::eye(1), array![0.0]).unwrap(),
            Regularizer::L1 { mu: 1.0 },
        )
        .unwrap();
        assert_eq!(obj.evaluate(&array![2.0]).unwrap(), ExtReal::Finite(4.0));
    }

    #[test]
    fn zero_loss_reports_penalty_only() {
        let obj = CompositeObjective::new(SmoothLoss::zero(2), Regularizer::L1 { mu: 2.0 }).unwrap();
        assert_eq!(obj.evaluate(&array![0.5, -1.0]).unwrap(), ExtReal::Finite(3.0));
    }

    #[test]
    fn infeasible_points_are_infinite() {
        let obj = CompositeObjective::new(
            SmoothLoss::least_squares(Matrix::eye(2), array![0.0, 0.0]).unwrap(),
            Regularizer::L0Ball { r: 1 },
        )
        .unwrap();
        assert_eq!(obj.evaluate(&array![1.0, 1.0]).unwrap(), ExtReal::Infinity);
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let obj = CompositeObjective::new(SmoothLoss::zero(2), Regularizer::Zero).unwrap();
        assert!(matches!(obj.evaluate(&array![1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn residual_examples() {
        let obj = CompositeObjective::new(SmoothLoss::zero(1), Regularizer::L1 { mu: 1.0 }).unwrap();
        assert_eq!(obj.prox_residual(&array![3.0], 1.0).unwrap(), 1.0);

        let a = array![[1.0, 0.5], [-0.3, 2.0], [0.7, 0.1]];
        let smooth = SmoothLoss::least_squares(a, array![1.0, 0.0, -1.0]).unwrap();
        let obj = CompositeObjective::new(smooth.clone(), Regularizer::Zero).unwrap();
        let x = array![0.3, -0.4];
        let g = smooth.gradient(&x).unwrap();
        let expected = 0.25 * g.dot(&g).sqrt();
        assert!((obj.prox_residual(&x, 0.25).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn lasso_stationary_point_has_zero_residual() {
        // min ½(x − 2)² + |x| at x = 1.
        let obj = CompositeObjective::new(
            SmoothLoss::least_squares(Matrix::eye(1), array![2.0]).unwrap(),
            Regularizer::L1 { mu: 1.0 },
        )
        .unwrap();
        assert_eq!(obj.prox_residual(&array![1.0], 1.0).unwrap(), 0.0);
        assert_eq!(obj.subgrad_distance(&array![1.0]).unwrap(), Some(0.0));
    }

    #[test]
    fn mismatched_regularizer_rejected() {
        let ball = crate::regularizers::GroupBall::contiguous(3, 1, 1.0, crate::regularizers::GroupNorm::L2).unwrap();
        assert!(CompositeObjective::new(SmoothLoss::zero(2), Regularizer::GroupBall(ball)).is_err());
    }
}
