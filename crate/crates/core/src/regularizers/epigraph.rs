//! Epigraph of the ℓ1 penalty, `K = {(u, s) : s ≥ μ‖u‖₁}`.

use crate::linalg::Vector;

use super::separable::soft_threshold;

/// Euclidean projection of `(z, t)` onto `K`.
///
/// For an active constraint the projection is `(soft(z, λμ), t + λ)` where
/// `λ ≥ 0` solves `μ‖soft(z, λμ)‖₁ = t + λ`; the root is found piecewise.
pub fn project_l1_epigraph(z: &Vector, t: f64, mu: f64) -> (Vector, f64) {
    let l1: f64 = z.iter().map(|v| v.abs()).sum();
    if mu * l1 <= t {
        return (z.clone(), t);
    }
    let mut a: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    let mut lambda = None;
    let mut partial = 0.0;
    for k in 1..=a.len() {
        partial += a[k - 1];
        let cand = (mu * partial - t) / (k as f64 * mu * mu + 1.0);
        let next = a.get(k).copied().unwrap_or(0.0);
        if cand >= 0.0 && a[k - 1] > cand * mu && cand * mu >= next {
            lambda = Some(cand);
            break;
        }
    }
    let lambda = lambda.unwrap_or_else(|| {
        if -t >= 0.0 && -t * mu >= a.first().copied().unwrap_or(0.0) {
            -t
        } else {
            bisect_root(z, t, mu)
        }
    });
    let u = z.mapv(|v| soft_threshold(v, lambda * mu));
    (u, t + lambda)
}

fn bisect_root(z: &Vector, t: f64, mu: f64) -> f64 {
    let excess = |l: f64| mu * z.iter().map(|v| (v.abs() - l * mu).max(0.0)).sum::<f64>() - t - l;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while excess(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `‖Proj_K[(x, P(x)) − (g, 1)] − (x, P(x))‖` for `P = μ‖·‖₁`, the lifted
/// residual of the smooth-plus-epigraph reformulation.
pub fn lifted_residual(x: &Vector, g: &Vector, mu: f64) -> f64 {
    let p = mu * x.iter().map(|v| v.abs()).sum::<f64>();
    let (u, s) = project_l1_epigraph(&(x - g), p - 1.0, mu);
    let du = &u - x;
    (du.dot(&du) + (s - p) * (s - p)).sqrt()
}
