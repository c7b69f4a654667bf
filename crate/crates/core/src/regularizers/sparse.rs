//! Cardinality-type members: ℓ0 ball, sparse simplex and trimmed ℓ1.

use crate::linalg::Vector;

use super::separable::soft_threshold;

/// Indices of the `k` largest keys; ties go to the lowest index.
pub(crate) fn top_indices(keys: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&i, &j| keys[j].total_cmp(&keys[i]).then(i.cmp(&j)));
    idx.truncate(k);
    idx
}

pub(crate) fn nnz(x: &Vector) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

pub(crate) fn l0_project(z: &Vector, r: usize) -> Vector {
    let mags: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    let mut out = Vector::zeros(z.len());
    for i in top_indices(&mags, r) {
        out[i] = z[i];
    }
    out
}

/// Euclidean projection of `z` onto the unit simplex.
pub fn simplex_project(z: &[f64]) -> Vec<f64> {
    let mut u = z.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j as f64 + 1.0);
        if uj - t > 0.0 {
            tau = t;
        }
    }
    z.iter().map(|v| (v - tau).max(0.0)).collect()
}

/// Projection onto `{x ∈ Δ : ‖x‖₀ ≤ r}`: keep the `r` largest entries, then
/// project them onto the simplex.
pub(crate) fn sparse_simplex_project(z: &Vector, r: usize) -> Vector {
    let vals: Vec<f64> = z.to_vec();
    let keep = top_indices(&vals, r.min(z.len()));
    let sub: Vec<f64> = keep.iter().map(|&i| z[i]).collect();
    let proj = simplex_project(&sub);
    let mut out = Vector::zeros(z.len());
    for (&i, v) in keep.iter().zip(proj) {
        out[i] = v;
    }
    out
}

/// Distance from `-g` to the limiting normal cone of `{‖x‖₀ ≤ r}` at `x`.
pub(crate) fn l0_distance(x: &Vector, g: &Vector, r: usize) -> f64 {
    if r >= x.len() {
        return g.dot(g).sqrt();
    }
    let mut on = 0.0;
    let mut off = Vec::new();
    for (xi, gi) in x.iter().zip(g.iter()) {
        if *xi != 0.0 {
            on += gi * gi;
        } else {
            off.push(gi * gi);
        }
    }
    let free = r.saturating_sub(x.len() - off.len());
    off.sort_by(f64::total_cmp);
    (on + off[..free].iter().sum::<f64>()).sqrt()
}

/// `min_τ Σ_fixed (g+τ)² + Σ_hinge max(g+τ, 0)²`, evaluated at its exact minimizer.
pub(crate) fn min_shifted_hinge(fixed: &[f64], hinge: &[f64]) -> f64 {
    let eval = |tau: f64| {
        fixed.iter().map(|g| (g + tau) * (g + tau)).sum::<f64>()
            + hinge.iter().map(|g| (g + tau).max(0.0).powi(2)).sum::<f64>()
    };
    let mut h = hinge.to_vec();
    h.sort_by(|a, b| b.total_cmp(a));
    let mut sum: f64 = fixed.iter().sum();
    let mut count = fixed.len();
    let mut best = f64::INFINITY;
    for j in 0..=h.len() {
        if j > 0 {
            sum += h[j - 1];
            count += 1;
        }
        if count == 0 {
            continue;
        }
        // Active hinges on this interval are the j largest.
        let lo = if j > 0 { -h[j - 1] } else { f64::NEG_INFINITY };
        let hi = if j < h.len() { -h[j] } else { f64::INFINITY };
        let tau = -sum / count as f64;
        if tau >= lo && tau <= hi {
            return eval(tau);
        }
        best = best.min(eval(tau.clamp(lo, hi)));
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

/// Distance from `-g` to the limiting normal cone of `Δ ∩ {‖x‖₀ ≤ r}` at `x`.
///
/// The cone is the union of `N_Δ(x)` and, for each `T ⊇ supp x` with `|T| = r`,
/// the set `{v : v_T constant}`.
pub(crate) fn sparse_simplex_distance(x: &Vector, g: &Vector, r: usize) -> f64 {
    let mut on = Vec::new();
    let mut off = Vec::new();
    for (xi, gi) in x.iter().zip(g.iter()) {
        if *xi > 0.0 {
            on.push(*gi);
        } else {
            off.push(*gi);
        }
    }
    let simplex_part = min_shifted_hinge(&on, &off);
    if r >= x.len() {
        return simplex_part.sqrt();
    }
    let extra = r.saturating_sub(on.len());
    off.sort_by(f64::total_cmp);
    let mut best = simplex_part;
    if extra <= off.len() {
        // The best completion of the support is a contiguous run in sorted order.
        for start in 0..=(off.len() - extra) {
            let mut vals = on.clone();
            vals.extend_from_slice(&off[start..start + extra]);
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let ss: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum();
            best = best.min(ss);
        }
    }
    best.sqrt()
}

pub(crate) fn trimmed_value(x: &Vector, mu: f64, gamma: f64, k: usize) -> f64 {
    let mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let l1: f64 = mags.iter().sum();
    let top: f64 = top_indices(&mags, k).iter().map(|&i| mags[i]).sum();
    mu * l1 - mu * gamma * top
}

/// Exact prox of `t·(μ‖x‖₁ − μγ Σ_{top k}|x_[i]|)`: the `k` largest `|z_i|`
/// are shrunk by `tμ(1 − γ)`, the rest by `tμ`.
pub(crate) fn trimmed_prox(z: &Vector, mu: f64, gamma: f64, k: usize, t: f64) -> Vector {
    let mags: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    let mut in_top = vec![false; z.len()];
    for i in top_indices(&mags, k) {
        in_top[i] = true;
    }
    Vector::from_shape_fn(z.len(), |i| {
        let tau = if in_top[i] { t * mu * (1.0 - gamma) } else { t * mu };
        soft_threshold(z[i], tau)
    })
}

/// Exact distance at points where the `k`-th and `(k+1)`-th magnitudes
/// differ; `None` at ties, where the subdifferential is a union of pieces.
pub(crate) fn trimmed_distance(x: &Vector, g: &Vector, mu: f64, gamma: f64, k: usize) -> Option<f64> {
    let mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let order = top_indices(&mags, x.len());
    if k > 0 && k < x.len() && mags[order[k - 1]] == mags[order[k]] {
        return None;
    }
    let mut in_top = vec![false; x.len()];
    for &i in &order[..k] {
        in_top[i] = true;
    }
    let sq: f64 = (0..x.len())
        .map(|i| {
            let c = if in_top[i] { mu * (1.0 - gamma) } else { mu };
            let d = if x[i] == 0.0 {
                (g[i].abs() - c).max(0.0)
            } else {
                (g[i] + c * x[i].signum()).abs()
            };
            d * d
        })
        .sum();
    Some(sq.sqrt())
}
