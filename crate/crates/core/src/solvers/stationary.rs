//! Brute-force stationary sets for low-dimensional instances.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::{distance, Vector};
use crate::objective::CompositeObjective;

/// Largest dimension accepted by the grid routines.
pub const MAX_GRID_DIM: usize = 3;

const ZERO_RESIDUAL: f64 = 1e-12;
const ACCEPT_RESIDUAL: f64 = 1e-9;
const REFINE_LEVELS: usize = 80;
const DEDUP_RADIUS: f64 = 1e-6;

/// Tensor grid with `resolution` points per axis, endpoints included.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    bounds: Vec<(f64, f64)>,
    resolution: usize,
}

impl Grid {
    pub fn new(bounds: Vec<(f64, f64)>, resolution: usize) -> Result<Self> {
        if bounds.is_empty() || bounds.len() > MAX_GRID_DIM {
            return Err(Error::Capability(format!(
                "grid routines support 1 to {MAX_GRID_DIM} dimensions, got {}",
                bounds.len()
            )));
        }
        if resolution < 2 {
            return Err(Error::Config("grid resolution must be at least 2".into()));
        }
        if let Some((lo, hi)) = bounds.iter().find(|(lo, hi)| !(lo < hi && lo.is_finite() && hi.is_finite())) {
            return Err(Error::Config(format!("invalid grid interval [{lo}, {hi}]")));
        }
        Ok(Grid { bounds, resolution })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.bounds
            .iter()
            .map(|(lo, hi)| (hi - lo) / (self.resolution - 1) as f64)
            .collect()
    }

    fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for slot in out.iter_mut() {
            *slot = idx % self.resolution;
            idx /= self.resolution;
        }
        out
    }

    fn ravel(&self, multi: &[usize]) -> usize {
        multi.iter().rev().fold(0, |acc, &i| acc * self.resolution + i)
    }

    pub fn point(&self, idx: usize) -> Vector {
        let multi = self.unravel(idx);
        let h = self.spacing();
        Vector::from_shape_fn(self.dim(), |d| self.bounds[d].0 + multi[d] as f64 * h[d])
    }

    pub fn points(&self) -> impl Iterator<Item = Vector> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Indices of the (up to `3ⁿ − 1`) adjacent grid points, diagonals included.
    fn neighbors(&self, idx: usize) -> Vec<usize> {
        let base = self.unravel(idx);
        let n = self.dim();
        let mut out = Vec::new();
        for code in 0..3usize.pow(n as u32) {
            let mut c = code;
            let mut multi = base.clone();
            let mut ok = true;
            let mut moved = false;
            for slot in multi.iter_mut() {
                let off = (c % 3) as isize - 1;
                c /= 3;
                moved |= off != 0;
                let v = *slot as isize + off;
                if v < 0 || v >= self.resolution as isize {
                    ok = false;
                    break;
                }
                *slot = v as usize;
            }
            if ok && moved {
                out.push(self.ravel(&multi));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationarySet {
    pub points: Vec<Vector>,
    /// Whether a cluster of exactly stationary grid points was found, in
    /// which case its grid points stand in for a continuum of solutions.
    pub continuum: bool,
    /// Residual level below which grid local minima become candidates.
    pub threshold: f64,
}

impl StationarySet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance_to(&self, x: &Vector) -> f64 {
        self.points.iter().map(|p| distance(p, x)).fold(f64::INFINITY, f64::min)
    }
}

fn unit_residual(obj: &CompositeObjective, x: &Vector) -> f64 {
    obj.prox_residual(x, 1.0).unwrap_or(f64::INFINITY)
}

/// Stationary points of `obj` inside the grid box.
///
/// Candidates are grid points whose unit-step residual vanishes or is a
/// local minimum below `(2 + L)·‖h‖/2`, where `h` is the grid spacing.
/// Connected candidate clusters are refined by a shrinking pattern search;
/// clusters containing several exactly stationary grid points are reported
/// as a continuum.
pub fn estimate_stationary_set(obj: &CompositeObjective, grid: &Grid) -> Result<StationarySet> {
    if obj.dim() != grid.dim() {
        return Err(Error::Dimension {
            expected: obj.dim(),
            found: grid.dim(),
        });
    }
    let residuals: Vec<f64> = grid.points().map(|x| unit_residual(obj, &x)).collect();
    estimate_stationary_set_from_grid(obj, grid, &residuals)
}

/// As [`estimate_stationary_set`], reusing precomputed grid residuals.
pub fn estimate_stationary_set_from_grid(
    obj: &CompositeObjective,
    grid: &Grid,
    residuals: &[f64],
) -> Result<StationarySet> {
    if obj.dim() > MAX_GRID_DIM {
        return Err(Error::Capability(format!(
            "stationary-set estimation supports n <= {MAX_GRID_DIM}, got n = {}",
            obj.dim()
        )));
    }
    crate::linalg::check_dim(grid.len(), residuals.len())?;
    let lipschitz = obj.smooth().lipschitz_bound()?;
    let h = grid.spacing();
    let half_diag = 0.5 * h.iter().map(|v| v * v).sum::<f64>().sqrt();
    let threshold = (2.0 + lipschitz) * half_diag;

    let is_zero = |i: usize| residuals[i] <= ZERO_RESIDUAL;
    let candidate: Vec<bool> = (0..grid.len())
        .map(|i| {
            is_zero(i)
                || (residuals[i] < threshold && grid.neighbors(i).iter().all(|&j| residuals[i] <= residuals[j]))
        })
        .collect();

    let mut seen = vec![false; grid.len()];
    let mut points = Vec::new();
    let mut continuum = false;
    for start in 0..grid.len() {
        if !candidate[start] || seen[start] {
            continue;
        }
        let mut cluster = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            cluster.push(i);
            for j in grid.neighbors(i) {
                if candidate[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        let zeros: Vec<usize> = cluster.iter().copied().filter(|&i| is_zero(i)).collect();
        if zeros.len() >= 2 {
            continuum = true;
            points.extend(zeros.iter().map(|&i| grid.point(i)));
            continue;
        }
        let best = cluster
            .iter()
            .copied()
            .min_by(|&a, &b| residuals[a].total_cmp(&residuals[b]))
            .expect("clusters are nonempty");
        let (x, r) = refine(obj, grid.point(best), residuals[best], &h);
        if r <= ACCEPT_RESIDUAL && !points.iter().any(|p| distance(p, &x) <= DEDUP_RADIUS) {
            points.push(x);
        }
    }
    points.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(StationarySet {
        points,
        continuum,
        threshold,
    })
}

/// Shrinking 5ⁿ-point pattern search on the unit-step residual.
fn refine(obj: &CompositeObjective, start: Vector, start_res: f64, h: &[f64]) -> (Vector, f64) {
    let n = start.len();
    let offsets = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut center = start;
    let mut best = start_res;
    let mut width: Vec<f64> = h.to_vec();
    for _ in 0..REFINE_LEVELS {
        if best <= ZERO_RESIDUAL * 1e-3 {
            break;
        }
        let mut cand = center.clone();
        for code in 0..5usize.pow(n as u32) {
            let mut c = code;
            let p = Vector::from_shape_fn(n, |d| {
                let o = offsets[c % 5];
                c /= 5;
                center[d] + o * width[d]
            });
            let r = unit_residual(obj, &p);
            if r < best {
                best = r;
                cand = p;
            }
        }
        center = cand;
        width.iter_mut().for_each(|w| *w *= 0.5);
    }
    (center, best)
}
