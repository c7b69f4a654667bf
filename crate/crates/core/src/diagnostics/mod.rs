//! Empirical KL-exponent estimates, rate fits, error-bound checks and
//! calculus-rule checkers.

mod error_bound;
mod fit;
mod rate;
pub mod rules;
mod sampling;
pub mod subjects;

pub use error_bound::{check_error_bound, ErrorBoundReport};
pub use fit::{
    fit_kl_exponent_from_trace, fit_kl_exponent_from_trace_with, gap_floor, ols, KlFitResult, LineFit,
    StationarityMeasure, TraceFitOptions, DEFINITIVE_R2,
};
pub use rate::{fit_geometric, fit_linear_rate, RateFitOptions, RateFitResult, RateKind, RateReference};
pub use sampling::{fit_kl_exponent_by_sampling, KlSubject, SamplingOptions, SamplingScheme};
