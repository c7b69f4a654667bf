//! Functions the sampling estimator and the rule checkers operate on.

use std::fmt;
use std::sync::Arc;

use crate::envelope::MoreauEnvelope;
use crate::error::{Error, Result};
use crate::linalg::{check_dim, ExtReal, Matrix, Vector};
use crate::objective::CompositeObjective;

use super::sampling::{KlSubject, SamplingScheme};

fn norm_of_sum(a: &Vector, b: &Vector) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x + y) * (x + y)).sum::<f64>().sqrt()
}

type ValueFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// A differentiable function given by closures.
#[derive(Clone)]
pub struct SmoothFunction {
    dim: usize,
    value: ValueFn,
    gradient: GradFn,
}

impl fmt::Debug for SmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFunction").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl SmoothFunction {
    pub fn new(
        dim: usize,
        value: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        SmoothFunction {
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    /// `coef·|t|^p` on `ℝ`, `p > 1`.
    pub fn power(coef: f64, p: f64) -> Self {
        Self::new(
            1,
            move |x| coef * x[0].abs().powf(p),
            move |x| Vector::from_elem(1, coef * p * x[0].abs().powf(p - 1.0) * x[0].signum()),
        )
    }

    /// `‖x − c‖² + offset`.
    pub fn shifted_square(center: Vector, offset: f64) -> Self {
        let c2 = center.clone();
        Self::new(
            center.len(),
            move |x| {
                let d = x - &center;
                d.dot(&d) + offset
            },
            move |x| (x - &c2) * 2.0,
        )
    }

    pub fn squared_norm(dim: usize) -> Self {
        Self::shifted_square(Vector::zeros(dim), 0.0)
    }

    /// `x ↦ g(Bx + d)`.
    pub fn compose_affine(outer: SmoothFunction, b: Matrix, d: Vector) -> Result<Self> {
        check_dim(outer.dim, b.nrows())?;
        check_dim(b.nrows(), d.len())?;
        let (bv, dv, outer_v) = (b.clone(), d.clone(), outer.clone());
        Ok(Self::new(
            b.ncols(),
            move |x| outer_v.eval(&(bv.dot(x) + &dv)),
            move |x| b.t().dot(&outer.grad(&(b.dot(x) + &d))),
        ))
    }

    /// `(x₁, …, x_k) ↦ Σ g_i(x_i)` over consecutive blocks.
    pub fn block_sum(blocks: Vec<SmoothFunction>) -> Self {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let blocks = Arc::new(blocks);
        let bv = Arc::clone(&blocks);
        let split = |blocks: &[SmoothFunction], x: &Vector| -> Vec<Vector> {
            let mut at = 0;
            blocks
                .iter()
                .map(|b| {
                    let part = x.slice(ndarray::s![at..at + b.dim]).to_owned();
                    at += b.dim;
                    part
                })
                .collect()
        };
        Self::new(
            dim,
            move |x| bv.iter().zip(split(&bv, x)).map(|(b, p)| b.eval(&p)).sum(),
            move |x| {
                let parts: Vec<f64> = blocks
                    .iter()
                    .zip(split(&blocks, x))
                    .flat_map(|(b, p)| b.grad(&p).to_vec())
                    .collect();
                Vector::from(parts)
            },
        )
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    pub fn grad(&self, x: &Vector) -> Vector {
        (self.gradient)(x)
    }
}

impl KlSubject for SmoothFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Vector) -> Result<ExtReal> {
        check_dim(self.dim, x.len())?;
        ExtReal::from_f64(self.eval(x))
    }

    fn shifted_subgrad_distance(&self, x: &Vector, shift: &Vector) -> Result<Option<f64>> {
        check_dim(self.dim, x.len())?;
        Ok(Some(norm_of_sum(&self.grad(x), shift)))
    }
}

/// Pointwise minimum of smooth pieces. The subgradient distance is taken
/// over the pieces active at `x`.
#[derive(Clone, Debug)]
pub struct MinOf {
    pieces: Vec<SmoothFunction>,
}

/// Relative tolerance deciding which pieces of a minimum are active.
pub const ACTIVE_TOL: f64 = 1e-12;

impl MinOf {
    pub fn new(pieces: Vec<SmoothFunction>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::Config("a minimum needs at least one piece".into()));
        };
        let dim = first.dim;
        for p in &pieces {
            check_dim(dim, p.dim)?;
        }
        Ok(MinOf { pieces })
    }

    pub fn pieces(&self) -> &[SmoothFunction] {
        &self.pieces
    }

    pub fn active_set(&self, x: &Vector) -> Vec<usize> {
        let vals: Vec<f64> = self.pieces.iter().map(|p| p.eval(x)).collect();
        let m = vals.iter().copied().fold(f64::INFINITY, f64::min);
        (0..vals.len())
            .filter(|&i| vals[i] <= m + ACTIVE_TOL * (1.0 + m.abs()))
            .collect()
    }
}

impl KlSubject for MinOf {
    fn dim(&self) -> usize {
        self.pieces[0].dim
    }

    fn value(&self, x: &Vector) -> Result<ExtReal> {
        check_dim(self.dim(), x.len())?;
        ExtReal::from_f64(self.pieces.iter().map(|p| p.eval(x)).fold(f64::INFINITY, f64::min))
    }

    fn shifted_subgrad_distance(&self, x: &Vector, shift: &Vector) -> Result<Option<f64>> {
        check_dim(self.dim(), x.len())?;
        let d = self
            .active_set(x)
            .into_iter()
            .map(|i| norm_of_sum(&self.pieces[i].grad(x), shift))
            .fold(f64::INFINITY, f64::min);
        Ok(Some(d))
    }
}

/// `F(x, y) = f(x) + (β/2)‖x − y‖²` on `ℝ²ⁿ`.
#[derive(Clone, Debug)]
pub struct PotentialFunction<S> {
    base: S,
    beta: f64,
}

impl<S: KlSubject> PotentialFunction<S> {
    pub fn new(base: S, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!("potential weight must be positive, got {beta}")));
        }
        Ok(PotentialFunction { base, beta })
    }

    fn split(&self, z: &Vector) -> (Vector, Vector) {
        let n = self.base.dim();
        (
            z.slice(ndarray::s![..n]).to_owned(),
            z.slice(ndarray::s![n..]).to_owned(),
        )
    }

    pub fn join(x: &Vector, y: &Vector) -> Vector {
        Vector::from_iter(x.iter().chain(y.iter()).copied())
    }
}

impl<S: KlSubject> KlSubject for PotentialFunction<S> {
    fn dim(&self) -> usize {
        2 * self.base.dim()
    }

    fn value(&self, z: &Vector) -> Result<ExtReal> {
        check_dim(self.dim(), z.len())?;
        let (x, y) = self.split(z);
        let d = &x - &y;
        Ok(self.base.value(&x)? + ExtReal::Finite(0.5 * self.beta * d.dot(&d)))
    }

    fn shifted_subgrad_distance(&self, z: &Vector, shift: &Vector) -> Result<Option<f64>> {
        check_dim(self.dim(), z.len())?;
        check_dim(self.dim(), shift.len())?;
        let (x, y) = self.split(z);
        let (sx, sy) = self.split(shift);
        let coupling = (&x - &y) * self.beta;
        let Some(dx) = self.base.shifted_subgrad_distance(&x, &(&sx + &coupling))? else {
            return Ok(None);
        };
        let dy = norm_of_sum(&sy, &(-&coupling));
        Ok(Some((dx * dx + dy * dy).sqrt()))
    }

    fn sample_point(&self, center: &Vector, offset: &Vector, scheme: SamplingScheme) -> Result<Vector> {
        let (cx, cy) = self.split(center);
        let (ux, uy) = self.split(offset);
        let x = self.base.sample_point(&cx, &ux, scheme)?;
        Ok(Self::join(&x, &(&cy + &uy)))
    }
}

impl KlSubject for CompositeObjective {
    fn dim(&self) -> usize {
        CompositeObjective::dim(self)
    }

    fn value(&self, x: &Vector) -> Result<ExtReal> {
        self.evaluate(x)
    }

    fn shifted_subgrad_distance(&self, x: &Vector, shift: &Vector) -> Result<Option<f64>> {
        let g = self.gradient(x)? + shift;
        self.reg().subgrad_distance(x, &g)
    }

    fn sample_point(&self, center: &Vector, offset: &Vector, scheme: SamplingScheme) -> Result<Vector> {
        match scheme {
            SamplingScheme::Ball => Ok(center + offset),
            SamplingScheme::ProxImage { step } => {
                let g = self.gradient(center)?;
                let z = crate::linalg::forward_point(center, &g, step) + offset;
                self.reg().prox(&z, step)
            }
        }
    }
}

impl KlSubject for MoreauEnvelope {
    fn dim(&self) -> usize {
        match self.base() {
            crate::envelope::EnvelopeBase::ScaledSquare { dim, .. } => *dim,
            crate::envelope::EnvelopeBase::Regularizer(crate::regularizers::Regularizer::GroupBall(b)) => b.dim(),
            // Separable catalog members act on any dimension; the checkers use ℝ¹.
            crate::envelope::EnvelopeBase::Regularizer(_) => 1,
        }
    }

    fn value(&self, x: &Vector) -> Result<ExtReal> {
        ExtReal::from_f64(MoreauEnvelope::value(self, x)?)
    }

    fn shifted_subgrad_distance(&self, x: &Vector, shift: &Vector) -> Result<Option<f64>> {
        Ok(Some(norm_of_sum(&self.gradient(x)?, shift)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn composition_gradient_is_chain_rule() {
        let f = SmoothFunction::compose_affine(SmoothFunction::power(1.0, 4.0), array![[1.0, 1.0]], array![0.0])
            .unwrap();
        let x = array![0.5, 0.25];
        assert!((f.eval(&x) - 0.75f64.powi(4)).abs() < 1e-15);
        let g = f.grad(&x);
        let expected = 4.0 * 0.75f64.powi(3);
        assert!((g[0] - expected).abs() < 1e-14 && (g[1] - expected).abs() < 1e-14);
    }

    #[test]
    fn block_sum_splits_coordinates() {
        let f = SmoothFunction::block_sum(vec![SmoothFunction::power(1.0, 2.0), SmoothFunction::power(1.0, 4.0)]);
        let x = array![0.5, 0.5];
        assert_eq!(f.eval(&x), 0.25 + 0.0625);
        assert_eq!(f.grad(&x), array![1.0, 0.5]);
    }

    #[test]
    fn min_uses_active_pieces() {
        let f = MinOf::new(vec![SmoothFunction::power(1.0, 2.0), SmoothFunction::power(1.0, 4.0)]).unwrap();
        assert_eq!(f.active_set(&array![0.5]), vec![1]);
        assert_eq!(f.active_set(&array![1.0]), vec![0, 1]);
        // At x = 1 both pieces are active with gradients 2 and 4.
        assert_eq!(f.subgrad_distance(&array![1.0]).unwrap(), Some(2.0));
    }

    #[test]
    fn potential_on_diagonal_reduces_to_base() {
        let p = PotentialFunction::new(SmoothFunction::squared_norm(1), 3.0).unwrap();
        let z = array![0.7, 0.7];
        assert!((p.value(&z).unwrap().to_f64() - 0.49).abs() < 1e-15);
        // ∇F(x, y) = (2x + β(x − y), −β(x − y)).
        let d = p.subgrad_distance(&array![1.0, 0.0]).unwrap().unwrap();
        assert!((d - (25.0f64 + 9.0).sqrt()).abs() < 1e-14);
    }
}
