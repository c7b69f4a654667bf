//! Neighborhood-sampling estimator of the KL exponent at a point.
//!
//! Samples are binned by `log(f − f(x̄))`; within each bin the smallest
//! subgradient distance is kept and then pushed further down by a local
//! random search that stays inside the bin. The exponent is the slope of the
//! resulting lower envelope in log-log space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{ExtReal, Vector};

use super::fit::{clamp_exponent, gap_floor, ols, KlFitResult};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplingScheme {
    /// `x = x̄ + u`.
    Ball,
    /// `x = prox_{tP}(x̄ − t∇h(x̄) + u)`, which concentrates samples on the
    /// active manifold of a composite objective.
    ProxImage { step: f64 },
}

/// A function whose KL exponent can be estimated by sampling.
pub trait KlSubject {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> Result<ExtReal>;

    /// `dist(0, shift + ∂f(x))`, or `None` where no exact formula exists.
    fn shifted_subgrad_distance(&self, x: &Vector, shift: &Vector) -> Result<Option<f64>>;

    fn subgrad_distance(&self, x: &Vector) -> Result<Option<f64>> {
        self.shifted_subgrad_distance(x, &Vector::zeros(x.len()))
    }

    /// Maps a latent offset `u` around `center` to a sample point.
    fn sample_point(&self, center: &Vector, offset: &Vector, scheme: SamplingScheme) -> Result<Vector> {
        match scheme {
            SamplingScheme::Ball => Ok(center + offset),
            SamplingScheme::ProxImage { .. } => Err(Error::Config(
                "prox-image sampling needs a composite objective".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingOptions {
    pub scheme: SamplingScheme,
    pub bins: usize,
    /// Sample radii are `radius · 10^(−decades·U)` with `U` uniform on `[0, 1)`.
    pub decades: f64,
    /// Local-search steps spent on each bin minimum.
    pub refine_steps: usize,
    /// Gaps are capped at this quantile of the gaps seen on the outer sphere.
    pub gap_quantile: f64,
    pub boundary_probes: usize,
    pub seed: u64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            scheme: SamplingScheme::Ball,
            bins: 20,
            decades: 1.0,
            refine_steps: 300,
            gap_quantile: 0.02,
            boundary_probes: 1000,
            seed: 0x5eed,
        }
    }
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let v = Vector::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
        let norm = v.dot(&v).sqrt();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

struct Sample {
    offset: Vector,
    log_gap: f64,
    log_dist: f64,
}

struct Evaluator<'a, S: KlSubject + ?Sized> {
    subject: &'a S,
    center: &'a Vector,
    scheme: SamplingScheme,
    f_bar: f64,
    floor: f64,
    cap: f64,
}

impl<S: KlSubject + ?Sized> Evaluator<'_, S> {
    fn gap(&self, offset: &Vector) -> Result<Option<(Vector, f64)>> {
        let x = self.subject.sample_point(self.center, offset, self.scheme)?;
        Ok(match self.subject.value(&x) {
            Ok(ExtReal::Finite(v)) => Some((x, v - self.f_bar)),
            Ok(ExtReal::Infinity) | Err(Error::Domain(_)) => None,
            Err(e) => return Err(e),
        })
    }

    fn eval(&self, offset: &Vector) -> Result<Option<Sample>> {
        let Some((x, gap)) = self.gap(offset)? else {
            return Ok(None);
        };
        if !(gap > self.floor && gap < self.cap) {
            return Ok(None);
        }
        let d = match self.subject.subgrad_distance(&x)? {
            Some(d) if d > 0.0 && d.is_finite() => d,
            _ => return Ok(None),
        };
        Ok(Some(Sample {
            offset: offset.clone(),
            log_gap: gap.ln(),
            log_dist: d.ln(),
        }))
    }
}

/// Estimates the KL exponent of `subject` at `xbar` from `n_samples` points
/// within `radius` (in the latent space of the sampling scheme).
pub fn fit_kl_exponent_by_sampling<S: KlSubject + ?Sized>(
    subject: &S,
    xbar: &Vector,
    radius: f64,
    n_samples: usize,
    opts: &SamplingOptions,
) -> Result<KlFitResult> {
    crate::linalg::check_dim(subject.dim(), xbar.len())?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Config(format!("sampling radius must be positive, got {radius}")));
    }
    if opts.bins < 3 {
        return Err(Error::Config("at least three bins are needed".into()));
    }
    let f_bar = subject
        .value(xbar)?
        .finite()
        .ok_or_else(|| Error::Domain("reference point lies outside dom f".into()))?;
    let n = xbar.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut eval = Evaluator {
        subject,
        center: xbar,
        scheme: opts.scheme,
        f_bar,
        floor: gap_floor(f_bar),
        cap: f64::INFINITY,
    };

    let mut outer: Vec<f64> = Vec::with_capacity(opts.boundary_probes);
    for _ in 0..opts.boundary_probes {
        let u = random_direction(&mut rng, n) * radius;
        if let Some((_, gap)) = eval.gap(&u)? {
            if gap > eval.floor {
                outer.push(gap);
            }
        }
    }
    if !outer.is_empty() {
        outer.sort_by(f64::total_cmp);
        let idx = ((outer.len() as f64 * opts.gap_quantile) as usize).min(outer.len() - 1);
        eval.cap = outer[idx];
    }

    let mut samples = Vec::new();
    for _ in 0..n_samples {
        let scale = radius * 10f64.powf(-opts.decades * rng.random::<f64>());
        let u = random_direction(&mut rng, n) * scale;
        if let Some(s) = eval.eval(&u)? {
            samples.push(s);
        }
    }
    if samples.is_empty() {
        return Err(Error::DegenerateNeighborhood(format!(
            "all {n_samples} samples had f(x) <= f(x̄) or no subgradient distance"
        )));
    }

    let lo = samples.iter().map(|s| s.log_gap).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.log_gap).fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return Err(Error::InsufficientData("sampled gaps span no range".into()));
    }
    let width = (hi - lo) / opts.bins as f64;
    let bin_of = |lg: f64| (((lg - lo) / width) as usize).min(opts.bins - 1);
    let mut best: Vec<Option<Sample>> = (0..opts.bins).map(|_| None).collect();
    let kept = samples.len();
    for s in samples {
        let b = bin_of(s.log_gap);
        if best[b].as_ref().is_none_or(|cur| s.log_dist < cur.log_dist) {
            best[b] = Some(s);
        }
    }

    for (b, slot) in best.iter_mut().enumerate() {
        let Some(cur) = slot.as_mut() else { continue };
        let (blo, bhi) = (lo + b as f64 * width, lo + (b + 1) as f64 * width);
        let mut sigma = 0.1;
        for _ in 0..opts.refine_steps {
            let scale = cur.offset.dot(&cur.offset).sqrt().max(1e-300);
            let step = random_direction(&mut rng, n) * (sigma * scale * rng.random::<f64>());
            let u = &cur.offset + &step;
            if u.dot(&u).sqrt() > radius {
                sigma = (sigma * 0.8).max(1e-8);
                continue;
            }
            match eval.eval(&u)? {
                Some(s) if s.log_gap >= blo && s.log_gap <= bhi && s.log_dist < cur.log_dist => {
                    *cur = s;
                    sigma = (sigma * 1.5).min(1.0);
                }
                _ => sigma = (sigma * 0.8).max(1e-8),
            }
        }
    }

    let used: Vec<&Sample> = best.iter().flatten().collect();
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} nonempty bins for the lower envelope",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|s| s.log_gap).collect();
    let ys: Vec<f64> = used.iter().map(|s| s.log_dist).collect();
    let fit = ols(&xs, &ys).ok_or_else(|| Error::InsufficientData("envelope gaps coincide".into()))?;
    Ok(KlFitResult {
        alpha_hat: clamp_exponent(fit.slope),
        c_hat: fit.intercept.exp(),
        r_squared: fit.r_squared,
        window: (0, used.len()),
        f_star: f_bar,
        points: kept,
    })
}
