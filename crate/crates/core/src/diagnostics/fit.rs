//! Log-log fits of `dist(0, ∂f(x)) ≈ c·(f(x) − f*)^α`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::SolverTrace;

/// R² needed before an exponent is called definitive.
pub const DEFINITIVE_R2: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`. `None` with fewer than
/// two points or constant `x`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let scale = ys.iter().map(|y| y * y).sum::<f64>().max(1.0);
    let r_squared = if ss_tot <= 1e-28 * scale {
        if ss_res <= 1e-24 * scale {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlFitResult {
    /// Fitted exponent, clamped to `[0, 1)`.
    pub alpha_hat: f64,
    pub c_hat: f64,
    pub r_squared: f64,
    /// Half-open range of trace rows (or envelope bins) used by the fit.
    pub window: (usize, usize),
    pub f_star: f64,
    pub points: usize,
}

impl KlFitResult {
    pub fn is_definitive(&self) -> bool {
        self.r_squared >= DEFINITIVE_R2
    }
}

pub(crate) fn clamp_exponent(slope: f64) -> f64 {
    slope.clamp(0.0, 1.0f64.next_down())
}

/// Gaps at or below this level are discarded as numerically meaningless.
pub fn gap_floor(f_star: f64) -> f64 {
    10.0 * f64::EPSILON * f_star.abs()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationarityMeasure {
    /// `dist(0, ∂f(x^k))` from the trace.
    #[default]
    SubgradDistance,
    /// Unit-step prox residual from the trace.
    Residual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceFitOptions {
    pub measure: StationarityMeasure,
    /// Fraction of usable points, counted from the end, entering the fit.
    pub tail_fraction: f64,
    pub min_points: usize,
}

impl Default for TraceFitOptions {
    fn default() -> Self {
        TraceFitOptions {
            measure: StationarityMeasure::SubgradDistance,
            tail_fraction: 0.6,
            min_points: 10,
        }
    }
}

pub fn fit_kl_exponent_from_trace(trace: &SolverTrace, f_star: f64) -> Result<KlFitResult> {
    fit_kl_exponent_from_trace_with(trace, f_star, &TraceFitOptions::default())
}

pub fn fit_kl_exponent_from_trace_with(
    trace: &SolverTrace,
    f_star: f64,
    opts: &TraceFitOptions,
) -> Result<KlFitResult> {
    if !(0.0..=1.0).contains(&opts.tail_fraction) || opts.tail_fraction == 0.0 {
        return Err(Error::Config(format!(
            "tail fraction must lie in (0, 1], got {}",
            opts.tail_fraction
        )));
    }
    let floor = gap_floor(f_star);
    let usable: Vec<(usize, f64, f64)> = (0..trace.len())
        .filter_map(|k| {
            let gap = trace.objectives[k] - f_star;
            let d = match opts.measure {
                StationarityMeasure::SubgradDistance => trace.subgrad_dists[k]?,
                StationarityMeasure::Residual => trace.residuals[k],
            };
            (gap > floor && gap.is_finite() && d > 0.0 && d.is_finite()).then(|| (k, gap.ln(), d.ln()))
        })
        .collect();
    let min_points = opts.min_points.max(2);
    if usable.len() < min_points {
        return Err(Error::InsufficientData(format!(
            "{} usable trace points, need at least {min_points}",
            usable.len()
        )));
    }
    let take = ((usable.len() as f64 * opts.tail_fraction).ceil() as usize).clamp(min_points, usable.len());
    let tail = &usable[usable.len() - take..];
    let xs: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.2).collect();
    let fit = ols(&xs, &ys).ok_or_else(|| {
        Error::InsufficientData("objective gaps in the fitting window are all equal".into())
    })?;
    Ok(KlFitResult {
        alpha_hat: clamp_exponent(fit.slope),
        c_hat: fit.intercept.exp(),
        r_squared: fit.r_squared,
        window: (tail[0].0, tail[tail.len() - 1].0 + 1),
        f_star,
        points: tail.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synthetic(gaps: &[f64], dists: &[Option<f64>], f_star: f64) -> SolverTrace {
        SolverTrace {
            objectives: gaps.iter().map(|g| f_star + g).collect(),
            residuals: dists.iter().map(|d| d.unwrap_or(1.0)).collect(),
            step_residuals: vec![0.0; gaps.len()],
            subgrad_dists: dists.to_vec(),
            steps: vec![1.0; gaps.len()],
            converged: true,
            ..SolverTrace::default()
        }
    }

    fn power_law(alpha: f64, c: f64, n: usize) -> SolverTrace {
        let gaps: Vec<f64> = (0..n).map(|k| 0.5f64.powi(k as i32)).collect();
        let dists: Vec<Option<f64>> = gaps.iter().map(|g| Some(c * g.powf(alpha))).collect();
        synthetic(&gaps, &dists, 0.0)
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_kl_exponent_from_trace(&power_law(0.5, 3.0, 40), 0.0).unwrap();
        assert!((fit.alpha_hat - 0.5).abs() < 1e-12);
        assert!((fit.c_hat - 3.0).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.window, (16, 40));
    }

    #[test]
    fn constant_distance_gives_zero_exponent() {
        let gaps: Vec<f64> = (0..30).map(|k| 0.5f64.powi(k)).collect();
        let trace = synthetic(&gaps, &vec![Some(0.7); 30], 0.0);
        let fit = fit_kl_exponent_from_trace(&trace, 0.0).unwrap();
        assert_eq!(fit.alpha_hat, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn too_few_points() {
        let trace = power_law(0.5, 1.0, 9);
        assert!(matches!(fit_kl_exponent_from_trace(&trace, 0.0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn absent_distances_are_skipped() {
        let gaps: Vec<f64> = (0..20).map(|k| 0.5f64.powi(k)).collect();
        let mut dists: Vec<Option<f64>> = gaps.iter().map(|g| Some(g.sqrt())).collect();
        for d in dists.iter_mut().step_by(3) {
            *d = None;
        }
        let fit = fit_kl_exponent_from_trace(&synthetic(&gaps, &dists, 0.0), 0.0).unwrap();
        assert!((fit.alpha_hat - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gaps_near_machine_precision_are_dropped() {
        let f_star = 1.0;
        let mut gaps: Vec<f64> = (0..20).map(|k| 0.5f64.powi(k)).collect();
        gaps.extend([1e-16, 0.0]);
        let dists: Vec<Option<f64>> = gaps.iter().map(|g| Some(2.0 * g.sqrt() + 1e-30)).collect();
        let fit = fit_kl_exponent_from_trace(&synthetic(&gaps, &dists, f_star), f_star).unwrap();
        assert_eq!(fit.window.1, 20);
    }

    #[test]
    fn ols_recovers_line() {
        let fit = ols(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-15 && (fit.intercept - 1.0).abs() < 1e-15);
        assert!(ols(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    proptest! {
        #[test]
        fn power_laws_are_recovered(alpha_idx in 0usize..3, c in 0.1f64..10.0, n in 12usize..60) {
            let alpha = [0.25, 0.5, 0.75][alpha_idx];
            let fit = fit_kl_exponent_from_trace(&power_law(alpha, c, n), 0.0).unwrap();
            prop_assert!((fit.alpha_hat - alpha).abs() <= 1e-6);
            prop_assert!((fit.c_hat - c).abs() <= 1e-6 * c);
        }

        #[test]
        fn shrinking_window_is_stable(alpha_idx in 0usize..3, frac in 0.2f64..1.0) {
            let alpha = [0.25, 0.5, 0.75][alpha_idx];
            let trace = power_law(alpha, 2.0, 50);
            let wide = fit_kl_exponent_from_trace(&trace, 0.0).unwrap();
            let narrow = fit_kl_exponent_from_trace_with(
                &trace,
                0.0,
                &TraceFitOptions { tail_fraction: frac, ..TraceFitOptions::default() },
            )
            .unwrap();
            prop_assert!((wide.alpha_hat - narrow.alpha_hat).abs() <= 1e-6);
        }
    }
}
