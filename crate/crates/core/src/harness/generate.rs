//! Seeded synthetic instances.

use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Matrix, Vector};
use crate::losses::{LossKind, SmoothLoss};
use crate::objective::CompositeObjective;
use crate::regularizers::{GroupBall, Regularizer};

use super::config::{ProblemConfig, RegularizerKind};

/// Largest Poisson mean drawn for generated counts.
const MAX_POISSON_RATE: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct Problem {
    pub objective: CompositeObjective,
    pub x0: Vector,
    /// The signal used to generate `b`, absent for file data.
    pub planted: Option<Vector>,
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Matrix {
    let scale = 1.0 / (m as f64).sqrt();
    Matrix::from_shape_fn((m, n), |_| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Exactly `s` nonzeros; on the unit simplex when `simplex` is set.
pub fn planted_signal(rng: &mut ChaCha8Rng, n: usize, s: usize, simplex: bool) -> Vector {
    let mut x = Vector::zeros(n);
    for i in sample(rng, n, s) {
        let mag = 0.5 + rng.random::<f64>();
        x[i] = if simplex || rng.random::<bool>() { mag } else { -mag };
    }
    if simplex {
        let total = x.sum();
        x /= total;
    }
    x
}

fn observations(rng: &mut ChaCha8Rng, cfg: &ProblemConfig, a: &Matrix, x: &Vector) -> Result<Vector> {
    let mean = a.dot(x);
    let mut noisy = |v: f64| v + cfg.noise * rng.sample::<f64, _>(StandardNormal);
    Ok(match cfg.loss {
        LossKind::LeastSquares => mean.mapv_into(&mut noisy),
        // l(y) = Σ log(1 + exp(b_i y_i)) is small when b_i y_i < 0.
        LossKind::Logistic => mean.mapv_into(|v| if noisy(v) >= 0.0 { -1.0 } else { 1.0 }),
        LossKind::Poisson => {
            let mut counts = Vector::zeros(mean.len());
            for (c, v) in counts.iter_mut().zip(mean.iter()) {
                let rate = v.exp().clamp(f64::MIN_POSITIVE, MAX_POISSON_RATE);
                let dist = Poisson::new(rate).map_err(|e| Error::Domain(e.to_string()))?;
                *c = dist.sample(rng);
            }
            counts
        }
        LossKind::Zero => Vector::zeros(0),
    })
}

/// Reads rows `a_i1, …, a_in, b_i` without a header.
pub fn load_data(path: &Path) -> Result<(Matrix, Vector)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path.display().to_string(), e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::parse(path.display().to_string(), e))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(path.display().to_string(), e))?;
        rows.push(row);
    }
    let width = rows.first().map_or(0, Vec::len);
    if width < 2 || rows.iter().any(|r| r.len() != width) {
        return Err(Error::parse(
            path.display().to_string(),
            "rows must share a width of at least two columns",
        ));
    }
    let m = rows.len();
    let a = Matrix::from_shape_fn((m, width - 1), |(i, j)| rows[i][j]);
    let b = Vector::from_iter(rows.iter().map(|r| r[width - 1]));
    Ok((a, b))
}

fn smooth_loss(cfg: &ProblemConfig, a: Matrix, b: Vector) -> Result<SmoothLoss> {
    match cfg.loss {
        LossKind::LeastSquares => SmoothLoss::least_squares(a, b),
        LossKind::Logistic => SmoothLoss::logistic(a, b),
        LossKind::Poisson => {
            let radius = cfg
                .box_radius
                .ok_or_else(|| Error::Config("the Poisson loss requires a box_radius".into()))?;
            SmoothLoss::poisson(a, b)?.with_box(radius)
        }
        LossKind::Zero => Ok(SmoothLoss::zero(a.ncols())),
    }
}

fn regularizer(cfg: &ProblemConfig, scale: f64, n: usize, planted: Option<&Vector>) -> Result<Regularizer> {
    let mu = cfg.mu_factor * scale;
    Ok(match cfg.regularizer {
        RegularizerKind::L1 => Regularizer::L1 { mu },
        RegularizerKind::Scad => Regularizer::Scad {
            lambda: mu,
            theta: cfg.theta,
        },
        RegularizerKind::Mcp => Regularizer::Mcp {
            lambda: mu,
            theta: cfg.theta,
        },
        RegularizerKind::L0Ball => Regularizer::L0Ball { r: cfg.r },
        RegularizerKind::SparseSimplex => Regularizer::SparseSimplex { r: cfg.r },
        RegularizerKind::TrimmedL1 => Regularizer::TrimmedL1 {
            mu,
            gamma: cfg.trim_gamma,
            k: cfg.trim_k,
        },
        RegularizerKind::GroupBall => {
            let unit = GroupBall::contiguous(n, cfg.group_size, 1.0, cfg.group_norm)?;
            let gauge = planted.map_or(0.0, |x| unit.gauge(x));
            let sigma = cfg.sigma_factor * if gauge > 0.0 { gauge } else { 1.0 };
            Regularizer::GroupBall(GroupBall::contiguous(n, cfg.group_size, sigma, cfg.group_norm)?)
        }
        RegularizerKind::Zero => Regularizer::Zero,
    })
}

/// Builds the instance described by `cfg`. The same seed always yields
/// bit-identical data. The start is `prox_P(0)`.
pub fn generate_problem(cfg: &ProblemConfig) -> Result<Problem> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (a, b, planted) = match (&cfg.data_path, cfg.loss) {
        (Some(path), _) => {
            let (a, b) = load_data(path)?;
            (a, b, None)
        }
        (None, LossKind::Zero) => (Matrix::zeros((0, cfg.n)), Vector::zeros(0), None),
        (None, _) => {
            let a = gaussian_matrix(&mut rng, cfg.m, cfg.n);
            let simplex = cfg.regularizer == RegularizerKind::SparseSimplex;
            let x = planted_signal(&mut rng, cfg.n, cfg.sparsity, simplex);
            let b = observations(&mut rng, cfg, &a, &x)?;
            (a, b, Some(x))
        }
    };
    let n = a.ncols();
    let smooth = smooth_loss(cfg, a, b)?;
    let g0 = norm_inf(&smooth.gradient(&Vector::zeros(n))?);
    let scale = if g0 > 0.0 { g0 } else { 1.0 };
    let reg = regularizer(cfg, scale, n, planted.as_ref())?;
    let x0 = reg.prox(&Vector::zeros(n), 1.0)?;
    let objective = CompositeObjective::new(smooth, reg)?;
    Ok(Problem { objective, x0, planted })
}
