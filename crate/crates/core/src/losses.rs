//! Smooth parts `h(x) = l(Ax)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, ensure_finite, spectral_norm, Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    LeastSquares,
    Logistic,
    Poisson,
    Zero,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::LeastSquares => "least_squares",
            LossKind::Logistic => "logistic",
            LossKind::Poisson => "poisson",
            LossKind::Zero => "zero",
        }
    }
}

/// `h(x) = l(Ax)` with
/// - least squares: `l(y) = ½‖y − b‖²`
/// - logistic: `l(y) = Σ log(1 + exp(b_i y_i))`
/// - Poisson: `l(y) = Σ (exp(y_i) − b_i y_i)`
/// - zero: `l ≡ 0`
#[derive(Clone, Debug)]
pub struct SmoothLoss {
    kind: LossKind,
    a: Matrix,
    b: Vector,
    lipschitz: Option<f64>,
    box_radius: Option<f64>,
}

impl SmoothLoss {
    fn build(kind: LossKind, a: Matrix, b: Vector) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("data matrix has non-finite entries".into()));
        }
        ensure_finite(&b, "data vector b").map_err(|e| Error::Config(e.to_string()))?;
        Ok(SmoothLoss {
            kind,
            a,
            b,
            lipschitz: None,
            box_radius: None,
        })
    }

    pub fn least_squares(a: Matrix, b: Vector) -> Result<Self> {
        let mut s = Self::build(LossKind::LeastSquares, a, b)?;
        let norm = spectral_norm(&s.a);
        s.lipschitz = Some(positive_or_one(norm * norm));
        Ok(s)
    }

    pub fn logistic(a: Matrix, b: Vector) -> Result<Self> {
        let mut s = Self::build(LossKind::Logistic, a, b)?;
        let norm = spectral_norm(&s.a);
        let bmax = s.b.iter().fold(0.0f64, |m, v| m.max(v * v));
        s.lipschitz = Some(positive_or_one(norm * norm * bmax / 4.0));
        Ok(s)
    }

    /// Poisson loss. Its gradient is not globally Lipschitz, so a bound must
    /// be supplied through [`SmoothLoss::with_box`] or
    /// [`SmoothLoss::with_lipschitz`] before solvers accept it.
    pub fn poisson(a: Matrix, b: Vector) -> Result<Self> {
        Self::build(LossKind::Poisson, a, b)
    }

    pub fn zero(n: usize) -> Self {
        SmoothLoss {
            kind: LossKind::Zero,
            a: Matrix::zeros((0, n)),
            b: Vector::zeros(0),
            lipschitz: Some(1.0),
            box_radius: None,
        }
    }

    /// Restricts iterates to `‖x‖_∞ ≤ radius` and derives
    /// `L = ‖A‖² · exp(radius · max_i ‖A_i‖₁)` for the Poisson loss.
    pub fn with_box(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("box radius must be positive, got {radius}")));
        }
        self.box_radius = Some(radius);
        if self.kind == LossKind::Poisson {
            let norm = spectral_norm(&self.a);
            let row_l1 = self
                .a
                .rows()
                .into_iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0f64, f64::max);
            let l = norm * norm * (radius * row_l1).exp();
            if !l.is_finite() {
                return Err(Error::Config(format!(
                    "box radius {radius} gives an infinite Lipschitz bound"
                )));
            }
            self.lipschitz = Some(positive_or_one(l));
        }
        Ok(self)
    }

    /// Overrides the Lipschitz bound with a user-supplied value.
    pub fn with_lipschitz(mut self, l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Config(format!("Lipschitz bound must be positive, got {l}")));
        }
        self.lipschitz = Some(l);
        Ok(self)
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn data(&self) -> &Vector {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn box_radius(&self) -> Option<f64> {
        self.box_radius
    }

    /// Whether `∇h` is Lipschitz on all of `ℝⁿ` with the reported bound.
    pub fn is_globally_lipschitz(&self) -> bool {
        self.kind != LossKind::Poisson
    }

    pub fn in_box(&self, x: &Vector) -> bool {
        match self.box_radius {
            Some(r) => x.iter().all(|v| v.abs() <= r),
            None => true,
        }
    }

    pub fn lipschitz_bound(&self) -> Result<f64> {
        self.lipschitz.ok_or_else(|| {
            Error::Config(
                "the Poisson gradient is not globally Lipschitz; configure a box or an explicit bound"
                    .into(),
            )
        })
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        if self.kind == LossKind::Zero {
            return Ok(0.0);
        }
        let y = self.a.dot(x);
        let v = match self.kind {
            LossKind::LeastSquares => {
                0.5 * y.iter().zip(self.b.iter()).map(|(yi, bi)| (yi - bi) * (yi - bi)).sum::<f64>()
            }
            LossKind::Logistic => y.iter().zip(self.b.iter()).map(|(yi, bi)| softplus(bi * yi)).sum(),
            LossKind::Poisson => y.iter().zip(self.b.iter()).map(|(yi, bi)| yi.exp() - bi * yi).sum(),
            LossKind::Zero => unreachable!(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("{} loss overflowed", self.kind.as_str())))
        }
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x.len())?;
        if self.kind == LossKind::Zero {
            return Ok(Vector::zeros(self.dim()));
        }
        let mut r = self.a.dot(x);
        match self.kind {
            LossKind::LeastSquares => r -= &self.b,
            LossKind::Logistic => r.zip_mut_with(&self.b, |yi, bi| *yi = bi * sigmoid(bi * *yi)),
            LossKind::Poisson => r.zip_mut_with(&self.b, |yi, bi| *yi = yi.exp() - bi),
            LossKind::Zero => unreachable!(),
        }
        let g = self.a.t().dot(&r);
        ensure_finite(&g, "loss gradient")?;
        Ok(g)
    }
}

fn positive_or_one(l: f64) -> f64 {
    // A zero gradient is Lipschitz with every constant.
    if l > 0.0 {
        l
    } else {
        1.0
    }
}

/// `log(1 + exp(t))` without overflow.
pub fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use proptest::prelude::*;

    fn sample_matrix() -> Matrix {
        array![[1.0, -0.5, 0.3], [0.2, 0.8, -1.1], [-0.7, 0.4, 0.9], [0.5, 0.5, 0.5]]
    }

    fn all_losses() -> Vec<SmoothLoss> {
        let a = sample_matrix();
        vec![
            SmoothLoss::least_squares(a.clone(), array![1.0, -2.0, 0.5, 0.0]).unwrap(),
            SmoothLoss::logistic(a.clone(), array![1.0, -1.0, 1.0, -1.0]).unwrap(),
            SmoothLoss::poisson(a, array![0.0, 2.0, 1.0, 3.0]).unwrap().with_box(1.0).unwrap(),
            SmoothLoss::zero(3),
        ]
    }

    #[test]
    fn least_squares_value() {
        let s = SmoothLoss::least_squares(Matrix::eye(2), array![0.0, 0.0]).unwrap();
        assert_eq!(s.value(&array![3.0, 4.0]).unwrap(), 12.5);
    }

    #[test]
    fn logistic_value_and_gradient_at_origin() {
        let s = SmoothLoss::logistic(Matrix::eye(1), array![1.0]).unwrap();
        assert_relative_eq!(s.value(&array![0.0]).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(s.gradient(&array![0.0]).unwrap()[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn logistic_is_overflow_safe() {
        let s = SmoothLoss::logistic(Matrix::eye(1), array![1.0]).unwrap();
        assert_relative_eq!(s.value(&array![1000.0]).unwrap(), 1000.0, epsilon = 1e-9);
        assert!(s.value(&array![-1000.0]).unwrap() >= 0.0);
        assert_relative_eq!(s.gradient(&array![1000.0]).unwrap()[0], 1.0);
    }

    #[test]
    fn zero_row_matrix_gives_zero_loss() {
        let s = SmoothLoss::least_squares(Matrix::zeros((0, 3)), Vector::zeros(0)).unwrap();
        assert_eq!(s.value(&array![1.0, -2.0, 5.0]).unwrap(), 0.0);
        assert_eq!(s.gradient(&array![1.0, -2.0, 5.0]).unwrap(), array![0.0, 0.0, 0.0]);
    }

    #[test]
    fn least_squares_gradient() {
        let s = SmoothLoss::least_squares(Matrix::eye(2), array![1.0, 1.0]).unwrap();
        assert_eq!(s.gradient(&array![0.0, 0.0]).unwrap(), array![-1.0, -1.0]);
    }

    #[test]
    fn zero_kind_gradient_and_bound() {
        let s = SmoothLoss::zero(3);
        assert_eq!(s.gradient(&array![1.0, 2.0, 3.0]).unwrap(), Vector::zeros(3));
        assert_eq!(s.lipschitz_bound().unwrap(), 1.0);
        assert_eq!(s.with_lipschitz(1e-3).unwrap().lipschitz_bound().unwrap(), 1e-3);
    }

    #[test]
    fn lipschitz_bounds() {
        let ls = SmoothLoss::least_squares(Matrix::eye(3) * 2.0, Vector::zeros(3)).unwrap();
        assert_relative_eq!(ls.lipschitz_bound().unwrap(), 4.0, epsilon = 1e-12);
        let lg = SmoothLoss::logistic(Matrix::eye(3), Vector::ones(3)).unwrap();
        assert_relative_eq!(lg.lipschitz_bound().unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn poisson_without_box_is_rejected() {
        let p = SmoothLoss::poisson(Matrix::eye(2), array![1.0, 2.0]).unwrap();
        assert!(matches!(p.lipschitz_bound(), Err(Error::Config(_))));
        assert!(p.value(&array![0.0, 0.0]).is_ok());
    }

    #[test]
    fn poisson_overflow_is_a_domain_error() {
        let p = SmoothLoss::poisson(Matrix::eye(1), array![1.0]).unwrap();
        assert!(matches!(p.value(&array![1000.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn mismatched_dimensions() {
        let s = SmoothLoss::least_squares(Matrix::eye(2), array![1.0, 1.0]).unwrap();
        assert!(matches!(s.value(&array![1.0]), Err(Error::Dimension { expected: 2, found: 1 })));
        assert!(SmoothLoss::least_squares(Matrix::eye(2), array![1.0]).is_err());
    }

    fn point() -> impl Strategy<Value = Vector> {
        proptest::collection::vec(-1.0f64..1.0, 3).prop_map(Vector::from)
    }

    proptest! {
        #[test]
        fn gradient_matches_central_differences(x in point()) {
            for loss in all_losses() {
                let g = loss.gradient(&x).unwrap();
                let h = 1e-6;
                for i in 0..3 {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let fd = (loss.value(&xp).unwrap() - loss.value(&xm).unwrap()) / (2.0 * h);
                    let scale = g[i].abs().max(1.0);
                    prop_assert!((fd - g[i]).abs() <= 1e-4 * scale, "{:?} coord {}: fd {} vs {}", loss.kind(), i, fd, g[i]);
                }
            }
        }

        #[test]
        fn gradient_is_lipschitz_on_unit_box(x in point(), y in point()) {
            for loss in all_losses() {
                let l = loss.lipschitz_bound().unwrap();
                let d = &loss.gradient(&x).unwrap() - &loss.gradient(&y).unwrap();
                let lhs = d.dot(&d).sqrt();
                let dx = &x - &y;
                prop_assert!(lhs <= l * dx.dot(&dx).sqrt() * (1.0 + 1e-9) + 1e-12);
            }
        }

        #[test]
        fn losses_are_midpoint_convex(x in point(), y in point()) {
            for loss in all_losses() {
                let mid = (&x + &y) / 2.0;
                let lhs = loss.value(&mid).unwrap();
                let rhs = 0.5 * (loss.value(&x).unwrap() + loss.value(&y).unwrap());
                prop_assert!(lhs <= rhs + 1e-12);
            }
        }
    }
}
