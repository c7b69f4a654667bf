//! Brute-force proximal oracles written independently of the library.

use klprox::Vector;

/// Grid spacing of the one-dimensional oracle.
pub const GRID_STEP: f64 = 1e-5;

pub fn l1_value(u: f64, mu: f64) -> f64 {
    mu * u.abs()
}

pub fn scad_value(u: f64, lambda: f64, theta: f64) -> f64 {
    let a = u.abs();
    if a <= lambda {
        lambda * a
    } else if a <= theta * lambda {
        (2.0 * theta * lambda * a - a * a - lambda * lambda) / (2.0 * (theta - 1.0))
    } else {
        lambda * lambda * (theta + 1.0) / 2.0
    }
}

pub fn mcp_value(u: f64, lambda: f64, theta: f64) -> f64 {
    let a = u.abs();
    if a <= theta * lambda {
        lambda * a - a * a / (2.0 * theta)
    } else {
        theta * lambda * lambda / 2.0
    }
}

/// Minimizes `t·p(u) + ½(u − z)²` over a grid between 0 and `z`, where every
/// symmetric penalty nondecreasing in `|u|` has its minimizers.
pub fn grid_prox(p: impl Fn(f64) -> f64, z: f64, t: f64) -> f64 {
    let lo = z.min(0.0) - 10.0 * GRID_STEP;
    let steps = ((z.max(0.0) + 10.0 * GRID_STEP - lo) / GRID_STEP).ceil() as usize;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=steps {
        let u = lo + i as f64 * GRID_STEP;
        let v = t * p(u) + 0.5 * (u - z) * (u - z);
        if v < best.0 {
            best = (v, u);
        }
    }
    best.1
}

fn masks(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
}

fn half_sq_dist(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum()
}

fn argmin_over_supports(n: usize, mut candidate: impl FnMut(&[bool]) -> Option<(f64, Vec<f64>)>) -> Vector {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in masks(n) {
        if let Some((v, x)) = candidate(&s) {
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, x));
            }
        }
    }
    Vector::from(best.expect("some support is admissible").1)
}

/// Projection onto `{‖x‖₀ ≤ r}` by enumerating supports.
pub fn l0_oracle(z: &[f64], r: usize) -> Vector {
    argmin_over_supports(z.len(), |s| {
        if s.iter().filter(|b| **b).count() > r {
            return None;
        }
        let x: Vec<f64> = z.iter().zip(s).map(|(v, keep)| if *keep { *v } else { 0.0 }).collect();
        Some((half_sq_dist(&x, z), x))
    })
}

/// Projection of `z` onto the unit simplex by bisection on the shift `τ` in
/// `Σ max(zᵢ − τ, 0) = 1`.
pub fn simplex_by_bisection(z: &[f64]) -> Vec<f64> {
    let mass = |tau: f64| z.iter().map(|v| (v - tau).max(0.0)).sum::<f64>();
    let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (top - 1.0, top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    z.iter().map(|v| (v - tau).max(0.0)).collect()
}

/// Projection onto `{x ∈ Δ : ‖x‖₀ ≤ r}` by enumerating supports.
pub fn sparse_simplex_oracle(z: &[f64], r: usize) -> Vector {
    argmin_over_supports(z.len(), |s| {
        let idx: Vec<usize> = (0..z.len()).filter(|i| s[*i]).collect();
        if idx.is_empty() || idx.len() > r {
            return None;
        }
        let sub: Vec<f64> = idx.iter().map(|i| z[*i]).collect();
        let mut x = vec![0.0; z.len()];
        for (i, v) in idx.iter().zip(simplex_by_bisection(&sub)) {
            x[*i] = v;
        }
        Some((half_sq_dist(&x, z), x))
    })
}

pub fn trimmed_value(x: &[f64], mu: f64, gamma: f64, k: usize) -> f64 {
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mu * mags.iter().sum::<f64>() - mu * gamma * mags[..k].iter().sum::<f64>()
}

/// Prox of the trimmed penalty, written as the minimum over index sets `T`
/// with `|T| = k` of separable soft-thresholding problems.
pub fn trimmed_oracle(z: &[f64], mu: f64, gamma: f64, k: usize, t: f64) -> Vector {
    let shrink = |v: f64, tau: f64| v.signum() * (v.abs() - tau).max(0.0);
    argmin_over_supports(z.len(), |s| {
        if s.iter().filter(|b| **b).count() != k {
            return None;
        }
        let x: Vec<f64> = z
            .iter()
            .zip(s)
            .map(|(v, trimmed)| shrink(*v, if *trimmed { t * mu * (1.0 - gamma) } else { t * mu }))
            .collect();
        Some((t * trimmed_value(&x, mu, gamma, k) + half_sq_dist(&x, z), x))
    })
}

/// Projection onto `{x : Σ_j w_j ‖x_{B_j}‖₂ ≤ σ}` over disjoint blocks, solving
/// the piecewise-linear multiplier equation exactly at its breakpoints.
pub fn block_ball_oracle(z: &[f64], blocks: &[(Vec<usize>, f64)], sigma: f64) -> Vector {
    let norms: Vec<f64> = blocks.iter().map(|(b, _)| b.iter().map(|i| z[*i] * z[*i]).sum::<f64>().sqrt()).collect();
    let gauge: f64 = blocks.iter().zip(&norms).map(|((_, w), a)| w * a).sum();
    if gauge <= sigma {
        return Vector::from(z.to_vec());
    }
    let mut order: Vec<usize> = (0..blocks.len()).collect();
    let breakpoint = |j: usize| norms[j] / blocks[j].1;
    order.sort_by(|a, b| breakpoint(*b).total_cmp(&breakpoint(*a)));
    let (mut wa, mut ww) = (0.0, 0.0);
    let mut lambda = 0.0;
    for (pos, &j) in order.iter().enumerate() {
        let w = blocks[j].1;
        wa += w * norms[j];
        ww += w * w;
        lambda = (wa - sigma) / ww;
        let next = order.get(pos + 1).map_or(0.0, |&l| breakpoint(l));
        if lambda >= next {
            break;
        }
    }
    let mut x = vec![0.0; z.len()];
    for ((b, w), a) in blocks.iter().zip(&norms) {
        let scale = if *a > 0.0 { (1.0 - lambda * w / a).max(0.0) } else { 0.0 };
        for i in b {
            x[*i] = scale * z[*i];
        }
    }
    Vector::from(x)
}
