//! Dense vector and matrix aliases plus the extended-real value type.

use std::fmt;
use std::ops::Add;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = Array1<f64>;
pub type Matrix = Array2<f64>;

/// A value in `ℝ ∪ {+∞}`. Infinity is a distinct marker so that indicator
/// functions compose without ever producing NaN.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinity => None,
        }
    }

    /// Plain `f64` view, mapping the marker to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinity => f64::INFINITY,
        }
    }

    /// Converts a float, mapping `+inf` to the marker. NaN and `-inf` are rejected.
    pub fn from_f64(v: f64) -> Result<Self> {
        if v.is_nan() || v == f64::NEG_INFINITY {
            Err(Error::Domain(format!("value {v} is not an extended real")))
        } else if v == f64::INFINITY {
            Ok(ExtReal::Infinity)
        } else {
            Ok(ExtReal::Finite(v))
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinity,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinity => f.write_str("+inf"),
        }
    }
}

pub fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}

pub fn ensure_finite(v: &Vector, what: &str) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::Domain(format!(
            "{what} has a non-finite entry at index {i}"
        ))),
    }
}

pub fn norm(v: ArrayView1<f64>) -> f64 {
    v.dot(&v).sqrt()
}

pub fn distance(a: &Vector, b: &Vector) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn norm_inf(v: &Vector) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `x - step * g`, evaluated entrywise.
pub fn forward_point(x: &Vector, g: &Vector, step: f64) -> Vector {
    let mut out = x.clone();
    out.zip_mut_with(g, |xi, gi| *xi -= step * gi);
    out
}

const POWER_ITERS: usize = 50;
const POWER_TOL: f64 = 1e-8;

/// Largest singular value of `a` by power iteration on `AᵀA`.
pub fn spectral_norm(a: &Matrix) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    // Irrational-spaced positive start avoids symmetric null directions.
    let mut v = Array1::from_shape_fn(n, |i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract());
    let v_norm = norm(v.view());
    v /= v_norm;
    let mut est = 0.0;
    for _ in 0..POWER_ITERS {
        let w = a.t().dot(&a.dot(&v));
        let w_norm = norm(w.view());
        if w_norm == 0.0 {
            break;
        }
        v = w / w_norm;
        let done = (w_norm - est).abs() <= POWER_TOL * w_norm;
        est = w_norm;
        if done {
            break;
        }
    }
    if est == 0.0 {
        // Start vector in the null space of a nonzero matrix; fall back to
        // the Frobenius norm, which is an upper bound.
        return a.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    est.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn ext_real_addition_absorbs_infinity() {
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::Finite(2.5), ExtReal::Finite(3.5));
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::Infinity, ExtReal::Infinity);
        assert!(ExtReal::Finite(1e300) < ExtReal::Infinity);
    }

    #[test]
    fn ext_real_rejects_nan() {
        assert!(ExtReal::from_f64(f64::NAN).is_err());
        assert!(ExtReal::from_f64(f64::NEG_INFINITY).is_err());
        assert_eq!(ExtReal::from_f64(f64::INFINITY).unwrap(), ExtReal::Infinity);
    }

    #[test]
    fn spectral_norm_of_scaled_identity() {
        let a = Matrix::eye(4) * 2.0;
        assert!((spectral_norm(&a) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_of_rank_one() {
        // u vᵀ with ‖u‖ = 5, ‖v‖ = √2
        let a = array![[3.0, 3.0], [4.0, 4.0]];
        assert!((spectral_norm(&a) - 5.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn forward_point_matches_definition() {
        let x = array![1.0, 2.0];
        let g = array![0.5, -1.0];
        assert_eq!(forward_point(&x, &g, 2.0), array![0.0, 4.0]);
    }
}
