//! Cartesian parameter sweeps, run in parallel with one output directory per run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::{Overrides, ProblemConfig};
use super::presets;
use super::report::{emit_csv, emit_json, run_experiment, RunReport};

/// Environment variable capping the number of sweep threads.
pub const THREADS_VAR: &str = "KLPROX_THREADS";

/// A base configuration plus a `[grid]` table mapping keys to value lists.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepSpec {
    pub base: toml::Table,
    pub grid: BTreeMap<String, Vec<toml::Value>>,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut base: toml::Table = text.parse().map_err(|e| Error::parse("sweep file", e))?;
        let grid = match base.remove("grid") {
            None => BTreeMap::new(),
            Some(toml::Value::Table(t)) => t
                .into_iter()
                .map(|(k, v)| match v {
                    toml::Value::Array(vals) if !vals.is_empty() => Ok((k, vals)),
                    _ => Err(Error::Config(format!("grid entry {k:?} must be a nonempty array"))),
                })
                .collect::<Result<_>>()?,
            Some(_) => return Err(Error::Config("grid must be a table".into())),
        };
        Ok(SweepSpec { base, grid })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// All grid points with keys in lexicographic order, the last varying
    /// fastest; each is validated.
    pub fn expand(&self, preset: Option<&str>, overrides: &Overrides) -> Result<Vec<ProblemConfig>> {
        let mut base = self.base.clone();
        let file_preset = match base.remove("preset") {
            Some(toml::Value::String(s)) => Some(s),
            Some(_) => return Err(Error::Config("preset must be a string".into())),
            None => None,
        };
        let start = match preset.map(str::to_owned).or(file_preset) {
            Some(name) => presets::preset(&name)?,
            None => ProblemConfig::default(),
        };
        let start = start.overlay(base)?;
        let mut points: Vec<toml::Table> = vec![toml::Table::new()];
        for (key, values) in &self.grid {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(key.clone(), v.clone());
                        q
                    })
                })
                .collect();
        }
        points
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let mut cfg = start.overlay(p)?;
                cfg.apply(overrides);
                cfg.name = format!("{}-{i:04}", cfg.name);
                cfg.validate()?;
                Ok(cfg)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub index: usize,
    pub dir: PathBuf,
    pub report: Option<RunReport>,
    pub error: Option<String>,
}

/// `KLPROX_THREADS`, when set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_VAR).ok()?.trim().parse().ok().filter(|n| *n > 0)
}

/// Runs every configuration, writing `trace.csv` and `report.json` under
/// `out/run-NNNN/`. A failing run is recorded and does not stop the others.
pub fn run_sweep(configs: &[ProblemConfig], out: &Path, threads: Option<usize>) -> Result<Vec<SweepOutcome>> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(index, cfg)| {
                let dir = out.join(format!("run-{index:04}"));
                let run = || -> Result<RunReport> {
                    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                    let (report, trace) = run_experiment(cfg)?;
                    emit_csv(&trace, &dir.join("trace.csv"))?;
                    emit_json(&report, &dir.join("report.json"))?;
                    Ok(report)
                };
                let (report, error) = match run() {
                    Ok(r) => (Some(r), None),
                    Err(e) => {
                        log::warn!("run {index} failed: {e}");
                        (None, Some(e.to_string()))
                    }
                };
                Ok(SweepOutcome {
                    index,
                    dir,
                    report,
                    error,
                })
            })
            .collect()
    })
}
