//! Running one experiment and writing its trace and report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    fit_kl_exponent_from_trace, fit_linear_rate, KlFitResult, RateFitResult, RateReference,
};
use crate::error::{Error, Result};
use crate::solvers::{run_ipiano, run_pg, IPianoConfig, PgConfig, StepRule};
use crate::trace::{SolverTrace, StoppingMeasure};

use super::config::{ProblemConfig, SolverKind};
use super::generate::generate_problem;

pub const SCHEMA_VERSION: u32 = 1;

/// Marker written for absent values.
pub const NA: &str = "NA";

pub const CSV_HEADER: [&str; 5] = ["iter", "objective", "residual", "subgrad_dist", "step"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub iterations: usize,
    pub converged: bool,
    pub final_objective: f64,
    pub final_residual: f64,
    pub stopping: StoppingMeasure,
}

impl TraceSummary {
    pub fn of(trace: &SolverTrace) -> Self {
        TraceSummary {
            iterations: trace.iterations(),
            converged: trace.converged,
            final_objective: trace.final_objective().unwrap_or(f64::NAN),
            final_residual: trace.final_residual().unwrap_or(f64::NAN),
            stopping: trace.stopping,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: ProblemConfig,
    pub summary: TraceSummary,
    /// Geometric fit of `f(x^k) − f*` with `f*` the final objective.
    pub rate: Option<RateFitResult>,
    pub kl: Option<KlFitResult>,
    /// Why a requested fit is absent.
    pub notes: Vec<String>,
    pub wall_time_secs: f64,
}

impl RunReport {
    /// Equality up to the wall time.
    pub fn same_outcome(&self, other: &RunReport) -> bool {
        RunReport {
            wall_time_secs: 0.0,
            ..self.clone()
        } == RunReport {
            wall_time_secs: 0.0,
            ..other.clone()
        }
    }
}

pub fn solve(cfg: &ProblemConfig) -> Result<SolverTrace> {
    let problem = generate_problem(cfg)?;
    let obj = &problem.objective;
    match cfg.solver {
        SolverKind::Pg => run_pg(
            obj,
            &problem.x0,
            &PgConfig {
                step: cfg.step.map_or(StepRule::Auto, StepRule::Constant),
                max_iters: cfg.max_iters,
                tol: cfg.tol,
                record_subgrad: cfg.record_subgrad,
            },
        ),
        SolverKind::Ipiano => run_ipiano(
            obj,
            &problem.x0,
            &IPianoConfig {
                beta: cfg.beta,
                alpha: cfg.alpha,
                max_iters: cfg.max_iters,
                tol: cfg.tol,
                record_subgrad: cfg.record_subgrad,
            },
        ),
    }
}

/// Rate and KL fits against the reference value `f_star`, with a note for
/// each requested fit that failed.
pub fn fit_trace(
    trace: &SolverTrace,
    f_star: f64,
    fit_rate: bool,
    fit_kl: bool,
) -> (Option<RateFitResult>, Option<KlFitResult>, Vec<String>) {
    let mut notes = Vec::new();
    let rate = if fit_rate {
        fit_linear_rate(trace, RateReference::Objective(f_star))
            .map_err(|e| notes.push(format!("rate fit: {e}")))
            .ok()
    } else {
        None
    };
    let kl = if fit_kl {
        fit_kl_exponent_from_trace(trace, f_star)
            .map_err(|e| notes.push(format!("KL fit: {e}")))
            .ok()
    } else {
        None
    };
    (rate, kl, notes)
}

pub fn run_experiment(cfg: &ProblemConfig) -> Result<(RunReport, SolverTrace)> {
    let start = Instant::now();
    let trace = solve(cfg)?;
    let f_star = trace.final_objective().unwrap_or(f64::NAN);
    let (rate, kl, notes) = fit_trace(&trace, f_star, cfg.fit_rate, cfg.fit_kl);
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        summary: TraceSummary::of(&trace),
        rate,
        kl,
        notes,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    log::info!(
        "{}: {} iterations, converged = {}, f = {:e}",
        cfg.name,
        report.summary.iterations,
        report.summary.converged,
        report.summary.final_objective
    );
    Ok((report, trace))
}

pub fn emit_csv(trace: &SolverTrace, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let to_io = |e: csv::Error| Error::io(path, e.into());
    w.write_record(CSV_HEADER).map_err(to_io)?;
    for k in 0..trace.len() {
        let dist = trace.subgrad_dists[k].map_or_else(|| NA.to_owned(), |d| d.to_string());
        w.write_record([
            k.to_string(),
            trace.objectives[k].to_string(),
            trace.residuals[k].to_string(),
            dist,
            trace.steps[k].to_string(),
        ])
        .map_err(to_io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a trace written by [`emit_csv`]. Iterates and solver step
/// residuals are not stored and come back empty and zero.
pub fn read_csv(path: &Path) -> Result<SolverTrace> {
    let what = path.display().to_string();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::parse(&what, e))?;
    let header = reader.headers().map_err(|e| Error::parse(&what, e))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::parse(&what, format!("expected header {}", CSV_HEADER.join(","))));
    }
    let mut trace = SolverTrace::default();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::parse(&what, e))?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| Error::parse(&what, e));
        trace.objectives.push(num(1)?);
        trace.residuals.push(num(2)?);
        trace.subgrad_dists.push(if &rec[3] == NA { None } else { Some(num(3)?) });
        trace.steps.push(num(4)?);
        trace.step_residuals.push(0.0);
    }
    Ok(trace)
}

pub fn emit_json(report: &RunReport, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, report).map_err(|e| Error::io(path, e.into()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report: RunReport = serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(Error::parse(
            path.display().to_string(),
            format!("unsupported schema_version {}", report.schema_version),
        ));
    }
    Ok(report)
}
