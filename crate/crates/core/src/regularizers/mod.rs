//! The penalty catalog: values, proximal maps and subgradient distances.
//!
//! Set-valued proximal maps are resolved deterministically: the lowest index
//! wins among equal magnitudes, and for the scalar penalties the
//! smallest-magnitude minimizer wins.

pub mod epigraph;
mod group;
pub mod separable;
mod sparse;

pub use group::{GroupBall, GroupNorm, FEASIBILITY_TOL};
pub use sparse::simplex_project;

use crate::error::{Error, Result};
use crate::linalg::{check_dim, ExtReal, Vector};

use separable::{
    coordinate_distance, mcp_derivative, mcp_prox, mcp_value, scad_derivative, scad_prox, scad_value,
    soft_threshold,
};

#[derive(Clone, Debug, PartialEq)]
pub enum Regularizer {
    /// `μ‖x‖₁`
    L1 { mu: f64 },
    /// Smoothly clipped absolute deviation, `θ > 2`.
    Scad { lambda: f64, theta: f64 },
    /// Minimax concave penalty.
    Mcp { lambda: f64, theta: f64 },
    /// Indicator of `{‖x‖₀ ≤ r}`.
    L0Ball { r: usize },
    /// Indicator of `{x ∈ Δ : ‖x‖₀ ≤ r}` with `Δ` the unit simplex.
    SparseSimplex { r: usize },
    /// `μ‖x‖₁ − μγ Σ_{i ≤ k} |x|_[i]` with `|x|_[1] ≥ |x|_[2] ≥ …`.
    TrimmedL1 { mu: f64, gamma: f64, k: usize },
    GroupBall(GroupBall),
    Zero,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be a positive real, got {v}")))
    }
}

impl Regularizer {
    pub fn name(&self) -> &'static str {
        match self {
            Regularizer::L1 { .. } => "l1",
            Regularizer::Scad { .. } => "scad",
            Regularizer::Mcp { .. } => "mcp",
            Regularizer::L0Ball { .. } => "l0_ball",
            Regularizer::SparseSimplex { .. } => "sparse_simplex",
            Regularizer::TrimmedL1 { .. } => "trimmed_l1",
            Regularizer::GroupBall(_) => "group_ball",
            Regularizer::Zero => "zero",
        }
    }

    /// Checks parameter windows, naming the violated constraint.
    pub fn validate(&self) -> Result<()> {
        match self {
            Regularizer::L1 { mu } => positive("mu", *mu),
            Regularizer::Scad { lambda, theta } => {
                positive("lambda", *lambda)?;
                if *theta > 2.0 && theta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(format!("SCAD requires theta > 2, got {theta}")))
                }
            }
            Regularizer::Mcp { lambda, theta } => {
                positive("lambda", *lambda)?;
                positive("theta", *theta)
            }
            Regularizer::L0Ball { r } | Regularizer::SparseSimplex { r } => {
                if *r >= 1 {
                    Ok(())
                } else {
                    Err(Error::Config("sparsity level r must be at least 1".into()))
                }
            }
            Regularizer::TrimmedL1 { mu, gamma, .. } => {
                positive("mu", *mu)?;
                if *gamma > 0.0 && *gamma <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!("trimmed l1 requires gamma in (0, 1], got {gamma}")))
                }
            }
            Regularizer::GroupBall(_) | Regularizer::Zero => Ok(()),
        }
    }

    /// Checks that the regularizer acts on `ℝⁿ`.
    pub fn check_dim(&self, n: usize) -> Result<()> {
        match self {
            Regularizer::TrimmedL1 { k, .. } if *k > n => Err(Error::Config(format!(
                "trimmed l1 requires k <= n, got k = {k}, n = {n}"
            ))),
            Regularizer::GroupBall(ball) => check_dim(ball.dim(), n),
            _ => Ok(()),
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(self, Regularizer::L1 { .. } | Regularizer::GroupBall(_) | Regularizer::Zero)
    }

    pub fn is_separable(&self) -> bool {
        matches!(
            self,
            Regularizer::L1 { .. } | Regularizer::Scad { .. } | Regularizer::Mcp { .. } | Regularizer::Zero
        )
    }

    /// `ρ` such that `P + (ρ/2)‖·‖²` is convex, when `P` is weakly convex.
    pub fn weak_convexity_modulus(&self) -> Option<f64> {
        match self {
            Regularizer::L1 { .. } | Regularizer::Zero | Regularizer::GroupBall(_) => Some(0.0),
            Regularizer::Scad { theta, .. } => Some(1.0 / (theta - 1.0)),
            Regularizer::Mcp { theta, .. } => Some(1.0 / theta),
            _ => None,
        }
    }

    /// Whether the zeros of the unit-step prox residual are exactly the
    /// fixed points of every proximal gradient step with `γ < 1/L`.
    pub fn unit_step_residual_is_exact(&self) -> bool {
        self.weak_convexity_modulus().is_some_and(|rho| rho < 1.0)
    }

    pub fn value(&self, x: &Vector) -> Result<ExtReal> {
        self.check_dim(x.len())?;
        let v = match self {
            Regularizer::L1 { mu } => ExtReal::Finite(mu * x.iter().map(|v| v.abs()).sum::<f64>()),
            Regularizer::Scad { lambda, theta } => {
                ExtReal::Finite(x.iter().map(|t| scad_value(*t, *lambda, *theta)).sum())
            }
            Regularizer::Mcp { lambda, theta } => {
                ExtReal::Finite(x.iter().map(|t| mcp_value(*t, *lambda, *theta)).sum())
            }
            Regularizer::L0Ball { r } => indicator(sparse::nnz(x) <= *r),
            Regularizer::SparseSimplex { r } => indicator(in_sparse_simplex(x, *r)),
            Regularizer::TrimmedL1 { mu, gamma, k } => ExtReal::Finite(sparse::trimmed_value(x, *mu, *gamma, *k)),
            Regularizer::GroupBall(ball) => indicator(ball.contains(x)),
            Regularizer::Zero => ExtReal::ZERO,
        };
        Ok(v)
    }

    /// A global minimizer of `t·P(u) + ½‖u − z‖²`.
    pub fn prox(&self, z: &Vector, t: f64) -> Result<Vector> {
        self.check_dim(z.len())?;
        positive("prox step", t)?;
        let out = match self {
            Regularizer::L1 { mu } => z.mapv(|v| soft_threshold(v, t * mu)),
            Regularizer::Scad { lambda, theta } => z.mapv(|v| scad_prox(v, *lambda, *theta, t)),
            Regularizer::Mcp { lambda, theta } => z.mapv(|v| mcp_prox(v, *lambda, *theta, t)),
            Regularizer::L0Ball { r } => sparse::l0_project(z, *r),
            Regularizer::SparseSimplex { r } => sparse::sparse_simplex_project(z, *r),
            Regularizer::TrimmedL1 { mu, gamma, k } => sparse::trimmed_prox(z, *mu, *gamma, *k, t),
            Regularizer::GroupBall(ball) => ball.project(z),
            Regularizer::Zero => z.clone(),
        };
        Ok(out)
    }

    /// `dist(0, g + ∂P(x))` with `∂` the limiting subdifferential. `None`
    /// where no exact formula is implemented.
    pub fn subgrad_distance(&self, x: &Vector, g: &Vector) -> Result<Option<f64>> {
        self.check_dim(x.len())?;
        check_dim(x.len(), g.len())?;
        if !self.value(x)?.is_finite() {
            return Err(Error::Domain(format!("point lies outside the domain of the {} regularizer", self.name())));
        }
        let sep = |d: &dyn Fn(f64, f64) -> f64| -> f64 {
            x.iter().zip(g.iter()).map(|(xi, gi)| d(*xi, *gi).powi(2)).sum::<f64>().sqrt()
        };
        let d = match self {
            Regularizer::L1 { mu } => sep(&|xi, gi| coordinate_distance(xi, gi, |t| mu.copysign(t), *mu)),
            Regularizer::Scad { lambda, theta } => sep(&|xi, gi| {
                coordinate_distance(xi, gi, |t| scad_derivative(t, *lambda, *theta), *lambda)
            }),
            Regularizer::Mcp { lambda, theta } => sep(&|xi, gi| {
                coordinate_distance(xi, gi, |t| mcp_derivative(t, *lambda, *theta), *lambda)
            }),
            Regularizer::L0Ball { r } => sparse::l0_distance(x, g, *r),
            Regularizer::SparseSimplex { r } => sparse::sparse_simplex_distance(x, g, *r),
            Regularizer::TrimmedL1 { mu, gamma, k } => match sparse::trimmed_distance(x, g, *mu, *gamma, *k) {
                Some(d) => d,
                None => return Ok(None),
            },
            Regularizer::GroupBall(ball) => ball.distance(x, g)?,
            Regularizer::Zero => g.dot(g).sqrt(),
        };
        Ok(Some(d))
    }
}

fn indicator(feasible: bool) -> ExtReal {
    if feasible {
        ExtReal::ZERO
    } else {
        ExtReal::Infinity
    }
}

fn in_sparse_simplex(x: &Vector, r: usize) -> bool {
    let tol = FEASIBILITY_TOL * (x.len().max(1) as f64);
    x.iter().all(|v| *v >= 0.0) && (x.sum() - 1.0).abs() <= tol && sparse::nnz(x) <= r
}
