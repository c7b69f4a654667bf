//! Experiment configuration, problem generation, sweeps and reporting.

pub mod checks;
mod config;
mod generate;
pub mod presets;
mod report;
mod sweep;

pub use config::{Overrides, ProblemConfig, RegularizerKind, SolverKind};
pub use generate::{gaussian_matrix, generate_problem, load_data, planted_signal, Problem};
pub use report::{
    emit_csv, emit_json, fit_trace, read_csv, read_json, run_experiment, solve, RunReport, TraceSummary, CSV_HEADER,
    NA, SCHEMA_VERSION,
};
pub use sweep::{run_sweep, thread_cap, SweepOutcome, SweepSpec, THREADS_VAR};
