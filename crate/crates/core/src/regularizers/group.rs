//! Weighted group-norm ball `{x : Σ w_i ‖x_{G_i}‖_p ≤ σ}` for `p ∈ {1, 2}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Relative slack used when testing membership of the ball.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const BISECTION_ITERS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupNorm {
    L1,
    L2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupBall {
    groups: Vec<Vec<usize>>,
    weights: Vec<f64>,
    sigma: f64,
    norm: GroupNorm,
    // Euclidean blocks with weights. For p = 1 every coordinate is its own block.
    blocks: Vec<(Vec<usize>, f64)>,
    dim: usize,
}

impl GroupBall {
    /// `groups` must partition `0..n` (zero-based indices).
    pub fn new(groups: Vec<Vec<usize>>, weights: Vec<f64>, sigma: f64, norm: GroupNorm) -> Result<Self> {
        if groups.len() != weights.len() {
            return Err(Error::Config(format!(
                "group ball has {} groups but {} weights",
                groups.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Config(format!("group weights must be positive, got {w}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("group ball radius must be positive, got {sigma}")));
        }
        let dim: usize = groups.iter().map(Vec::len).sum();
        let mut seen = vec![false; dim];
        for &i in groups.iter().flatten() {
            if i >= dim || seen[i] {
                return Err(Error::Config(format!(
                    "groups must partition 0..{dim}; index {i} is out of range or repeated"
                )));
            }
            seen[i] = true;
        }
        if groups.iter().any(Vec::is_empty) {
            return Err(Error::Config("groups must be nonempty".into()));
        }
        let blocks = match norm {
            GroupNorm::L2 => groups.iter().cloned().zip(weights.iter().copied()).collect(),
            GroupNorm::L1 => groups
                .iter()
                .zip(&weights)
                .flat_map(|(g, &w)| g.iter().map(move |&i| (vec![i], w)))
                .collect(),
        };
        Ok(GroupBall {
            groups,
            weights,
            sigma,
            norm,
            blocks,
            dim,
        })
    }

    /// Contiguous groups of `size` over `0..n` with unit weights.
    pub fn contiguous(n: usize, size: usize, sigma: f64, norm: GroupNorm) -> Result<Self> {
        if size == 0 {
            return Err(Error::Config("group size must be positive".into()));
        }
        let groups: Vec<Vec<usize>> = (0..n).collect::<Vec<_>>().chunks(size).map(<[usize]>::to_vec).collect();
        let weights = vec![1.0; groups.len()];
        Self::new(groups, weights, sigma, norm)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn norm(&self) -> GroupNorm {
        self.norm
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn block_norm(v: &Vector, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| v[i] * v[i]).sum::<f64>().sqrt()
    }

    /// `Σ w_i ‖x_{G_i}‖_p`.
    pub fn gauge(&self, x: &Vector) -> f64 {
        self.blocks.iter().map(|(idx, w)| w * Self::block_norm(x, idx)).sum()
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.gauge(x) <= self.sigma * (1.0 + FEASIBILITY_TOL)
    }

    /// Euclidean projection by bisection on the multiplier of the
    /// block soft-thresholding map.
    pub fn project(&self, z: &Vector) -> Vector {
        if self.gauge(z) <= self.sigma {
            return z.clone();
        }
        let norms: Vec<f64> = self.blocks.iter().map(|(idx, _)| Self::block_norm(z, idx)).collect();
        let shrunk = |nu: f64| -> f64 {
            self.blocks
                .iter()
                .zip(&norms)
                .map(|((_, w), nb)| w * (nb - nu * w).max(0.0))
                .sum()
        };
        let mut lo = 0.0;
        let mut hi = self
            .blocks
            .iter()
            .zip(&norms)
            .map(|((_, w), nb)| nb / w)
            .fold(0.0f64, f64::max);
        for _ in 0..BISECTION_ITERS {
            let mid = 0.5 * (lo + hi);
            let s = shrunk(mid);
            if s > self.sigma {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        let nu = hi;
        let mut out = Vector::zeros(z.len());
        for ((idx, w), nb) in self.blocks.iter().zip(&norms) {
            if *nb > 0.0 {
                let scale = (1.0 - nu * w / nb).max(0.0);
                for &i in idx {
                    out[i] = z[i] * scale;
                }
            }
        }
        out
    }

    /// Distance from `-g` to the normal cone of the ball at `x`.
    pub fn distance(&self, x: &Vector, g: &Vector) -> Result<f64> {
        let phi = self.gauge(x);
        if phi > self.sigma * (1.0 + FEASIBILITY_TOL) {
            return Err(Error::Domain(format!(
                "point lies outside the group ball (gauge {phi} > {})",
                self.sigma
            )));
        }
        let full = g.dot(g).sqrt();
        if phi < self.sigma * (1.0 - FEASIBILITY_TOL) {
            return Ok(full);
        }
        // Boundary: normal cone is s·∂φ(x), s ≥ 0. Per block, a nonzero block
        // contributes ‖g_b + s w u_b‖², a zero block max(‖g_b‖ − s w, 0)².
        struct Block<'a> {
            idx: &'a [usize],
            w: f64,
            xn: f64,
            gn: f64,
            inner: Option<f64>,
        }
        let blocks: Vec<Block> = self
            .blocks
            .iter()
            .map(|(idx, w)| {
                let xn = Self::block_norm(x, idx);
                let inner = (xn > 0.0).then(|| idx.iter().map(|&i| g[i] * x[i] / xn).sum());
                Block {
                    idx,
                    w: *w,
                    xn,
                    gn: Self::block_norm(g, idx),
                    inner,
                }
            })
            .collect();
        let eval = |s: f64| -> f64 {
            blocks
                .iter()
                .map(|b| match b.inner {
                    Some(_) => b
                        .idx
                        .iter()
                        .map(|&i| (g[i] + s * b.w * x[i] / b.xn).powi(2))
                        .sum::<f64>(),
                    None => (b.gn - s * b.w).max(0.0).powi(2),
                })
                .sum()
        };
        let mut breaks: Vec<f64> = blocks.iter().filter(|b| b.inner.is_none()).map(|b| b.gn / b.w).collect();
        breaks.push(0.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut best = eval(0.0);
        for (j, &lo) in breaks.iter().enumerate() {
            let hi = breaks.get(j + 1).copied().unwrap_or(f64::INFINITY);
            let probe = if hi.is_finite() { 0.5 * (lo + hi) } else { lo + 1.0 };
            // Quadratic a s² + b s on this interval.
            let (mut a, mut b) = (0.0, 0.0);
            for blk in &blocks {
                match blk.inner {
                    Some(ip) => {
                        a += blk.w * blk.w;
                        b += 2.0 * blk.w * ip;
                    }
                    None if blk.gn - probe * blk.w > 0.0 => {
                        a += blk.w * blk.w;
                        b -= 2.0 * blk.w * blk.gn;
                    }
                    None => {}
                }
            }
            let s = if a > 0.0 { (-b / (2.0 * a)).clamp(lo, hi) } else { lo };
            best = best.min(eval(s)).min(eval(lo));
        }
        Ok(best.min(full * full).sqrt())
    }
}
