//! Invariant and error-bound suites behind the `check` command.

use ndarray::array;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{check_error_bound, ErrorBoundReport};
use crate::error::Result;
use crate::linalg::{distance, Matrix, Vector};
use crate::losses::SmoothLoss;
use crate::objective::CompositeObjective;
use crate::regularizers::epigraph::project_l1_epigraph;
use crate::regularizers::{GroupBall, GroupNorm, Regularizer};
use crate::solvers::Grid;

/// Slack allowed in the sampled inequalities.
pub const SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub samples: usize,
    /// Largest `lhs − rhs` seen; the check passes when it is at most [`SLACK`].
    pub worst_excess: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn from_excesses(name: impl Into<String>, excesses: &[f64]) -> Self {
        let worst = excesses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        CheckOutcome {
            name: name.into(),
            samples: excesses.len(),
            worst_excess: worst,
            passed: worst <= SLACK,
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// A random member of the separable family `kind` with its breakpoints.
fn separable_member(rng: &mut ChaCha8Rng, kind: &str) -> (Regularizer, Vec<f64>) {
    match kind {
        "l1" => (Regularizer::L1 { mu: uniform(rng, 0.2, 2.0) }, vec![0.0]),
        "scad" => {
            let (lambda, theta) = (uniform(rng, 0.2, 2.0), uniform(rng, 2.1, 5.0));
            (Regularizer::Scad { lambda, theta }, vec![0.0, lambda, theta * lambda])
        }
        "mcp" => {
            let (lambda, theta) = (uniform(rng, 0.2, 2.0), uniform(rng, 1.2, 5.0));
            (Regularizer::Mcp { lambda, theta }, vec![0.0, theta * lambda])
        }
        _ => (Regularizer::Zero, vec![0.0]),
    }
}

/// Points mixing kinks, branch boundaries and generic values.
fn sample_point(rng: &mut ChaCha8Rng, breaks: &[f64], scale: f64) -> (Vector, Vector) {
    let n = rng.random_range(1..=4);
    let x = Vector::from_shape_fn(n, |_| {
        let u: f64 = rng.random();
        if u < 0.25 {
            0.0
        } else if u < 0.45 {
            let b = breaks[rng.random_range(0..breaks.len())];
            if rng.random::<bool>() { b } else { -b }
        } else {
            3.0 * scale * normal(rng)
        }
    });
    let g = Vector::from_shape_fn(n, |_| 1.5 * scale * normal(rng));
    (x, g)
}

fn scale_of(reg: &Regularizer) -> f64 {
    match reg {
        Regularizer::L1 { mu } => *mu,
        Regularizer::Scad { lambda, .. } | Regularizer::Mcp { lambda, .. } => *lambda,
        _ => 1.0,
    }
}

/// Excesses `‖prox_P(x − g) − x‖ − c·dist(0, g + ∂P(x))` with `c = 1`, or
/// `c = 1/(1 − ρ)` for a `ρ`-weakly convex member when `weak` is set.
pub fn residual_excesses(kind: &str, samples: usize, weak: bool, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        let (reg, breaks) = separable_member(&mut rng, kind);
        let (x, g) = sample_point(&mut rng, &breaks, scale_of(&reg));
        let Some(dist) = reg.subgrad_distance(&x, &g)? else {
            continue;
        };
        let residual = distance(&reg.prox(&(&x - &g), 1.0)?, &x);
        let factor = if weak {
            1.0 / (1.0 - reg.weak_convexity_modulus().unwrap_or(0.0))
        } else {
            1.0
        };
        out.push(residual - factor * dist);
    }
    Ok(out)
}

fn convex_member(rng: &mut ChaCha8Rng, kind: &str, n: usize) -> Result<Regularizer> {
    Ok(match kind {
        "l1" => Regularizer::L1 { mu: uniform(rng, 0.2, 2.0) },
        "group_ball_l2" | "group_ball_l1" => {
            let norm = if kind.ends_with("l2") { GroupNorm::L2 } else { GroupNorm::L1 };
            let size = rng.random_range(1..=n);
            Regularizer::GroupBall(GroupBall::contiguous(n, size, uniform(rng, 0.5, 3.0), norm)?)
        }
        _ => Regularizer::Zero,
    })
}

/// Excesses `‖prox(y) − prox(z)‖ − ‖y − z‖` on random pairs.
pub fn nonexpansive_excesses(kind: &str, pairs: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs)
        .map(|_| {
            let n = rng.random_range(1..=6);
            let reg = convex_member(&mut rng, kind, n)?;
            let t = uniform(&mut rng, 0.1, 2.0);
            let y = Vector::from_shape_fn(n, |_| 2.0 * normal(&mut rng));
            let z = Vector::from_shape_fn(n, |_| 2.0 * normal(&mut rng));
            Ok(distance(&reg.prox(&y, t)?, &reg.prox(&z, t)?) - distance(&y, &z))
        })
        .collect()
}

/// For `P = ‖·‖₁` on `ℝⁿ`, `n ≤ 3`, with `(y, s) = Proj_K[(x, P(x)) − (g, 1)]`
/// and `w = prox_P(x − g)`: excesses of `‖(y, s) − (x, P(x))‖` over
/// `(M + 1)‖w − x‖`, and of `‖y − x‖` over the same bound, `M = √n`.
pub fn appendix_excesses(samples: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reg = Regularizer::L1 { mu: 1.0 };
    let mut lifted = Vec::with_capacity(samples);
    let mut primal = Vec::with_capacity(samples);
    for _ in 0..samples {
        let n = rng.random_range(1..=3);
        let x = Vector::from_shape_fn(n, |_| if rng.random::<f64>() < 0.3 { 0.0 } else { 2.0 * normal(&mut rng) });
        let g = Vector::from_shape_fn(n, |_| 2.0 * normal(&mut rng));
        let p = x.iter().map(|v| v.abs()).sum::<f64>();
        let (y, s) = project_l1_epigraph(&(&x - &g), p - 1.0, 1.0);
        let w = reg.prox(&(&x - &g), 1.0)?;
        let bound = ((n as f64).sqrt() + 1.0) * distance(&w, &x);
        let dy = distance(&y, &x);
        lifted.push((dy * dy + (s - p) * (s - p)).sqrt() - bound);
        primal.push(dy - bound);
    }
    Ok((lifted, primal))
}

pub const SEPARABLE_KINDS: [&str; 4] = ["l1", "scad", "mcp", "zero"];
pub const CONVEX_KINDS: [&str; 4] = ["l1", "group_ball_l2", "group_ball_l1", "zero"];

/// 1000 residual-inequality samples split over the separable members, its
/// weakly convex correction, 200 nonexpansiveness pairs per convex member and
/// 200 lifted-residual samples.
pub fn inequality_suite(seed: u64) -> Result<Vec<CheckOutcome>> {
    let per_kind = 1000 / SEPARABLE_KINDS.len();
    let mut out = Vec::new();
    for (i, kind) in SEPARABLE_KINDS.iter().enumerate() {
        let ex = residual_excesses(kind, per_kind, false, seed + i as u64)?;
        out.push(CheckOutcome::from_excesses(format!("residual/{kind}"), &ex));
    }
    for (i, kind) in ["scad", "mcp"].iter().enumerate() {
        let ex = residual_excesses(kind, per_kind, true, seed + 10 + i as u64)?;
        out.push(CheckOutcome::from_excesses(format!("residual-weak/{kind}"), &ex));
    }
    for (i, kind) in CONVEX_KINDS.iter().enumerate() {
        let ex = nonexpansive_excesses(kind, 200, seed + 20 + i as u64)?;
        out.push(CheckOutcome::from_excesses(format!("nonexpansive/{kind}"), &ex));
    }
    let (lifted, primal) = appendix_excesses(200, seed + 30)?;
    out.push(CheckOutcome::from_excesses("lifted-residual/l1", &lifted));
    out.push(CheckOutcome::from_excesses("lifted-primal/l1", &primal));
    Ok(out)
}

fn lasso(a: Matrix, b: Vector, mu: f64) -> Result<CompositeObjective> {
    CompositeObjective::new(SmoothLoss::least_squares(a, b)?, Regularizer::L1 { mu })
}

fn mcp(a: Matrix, b: Vector, lambda: f64, theta: f64) -> Result<CompositeObjective> {
    CompositeObjective::new(SmoothLoss::least_squares(a, b)?, Regularizer::Mcp { lambda, theta })
}

/// Error-bound reports for small lasso and MCP instances, 200 points per axis.
pub fn error_bound_suite() -> Result<Vec<(String, ErrorBoundReport)>> {
    let line = Grid::new(vec![(-2.0, 4.0)], 200)?;
    let wide = Grid::new(vec![(-4.0, 6.0)], 200)?;
    let square = Grid::new(vec![(-2.0, 4.0), (-2.0, 4.0)], 200)?;
    let a2 = array![[1.0, 0.5], [0.2, 1.0], [0.3, -0.4]];
    let cases = vec![
        ("lasso-1d", lasso(Matrix::eye(1), array![2.0], 1.0)?, line),
        ("mcp-1d", mcp(array![[0.5]], array![1.5], 1.0, 2.0)?, wide),
        ("lasso-2d", lasso(a2.clone(), array![2.0, 0.5, -1.0], 0.5)?, square.clone()),
        ("mcp-2d", mcp(a2, array![2.0, 0.5, -1.0], 0.5, 2.0)?, square),
    ];
    cases
        .into_iter()
        .map(|(name, obj, grid)| Ok((name.to_owned(), check_error_bound(&obj, &grid, f64::INFINITY, f64::INFINITY)?)))
        .collect()
}
