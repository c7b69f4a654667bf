//! Per-iteration solver records.

use serde::{Deserialize, Serialize};

use crate::linalg::Vector;

/// Which quantity a solver compared against its tolerance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingMeasure {
    /// `‖prox_P(x − ∇h(x)) − x‖`.
    #[default]
    UnitStep,
    /// `‖x⁺ − x‖` for the step actually taken.
    SolverStep,
}

/// Row `k` describes iterate `x^k`, with `x^0` the starting point. All
/// sequences have equal length; `iterates` may be empty for traces loaded
/// from CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverTrace {
    pub iterates: Vec<Vector>,
    pub objectives: Vec<f64>,
    /// Unit-step prox residuals.
    pub residuals: Vec<f64>,
    /// `‖x^{k+1} − x^k‖` as computed from the step at row `k`.
    pub step_residuals: Vec<f64>,
    pub subgrad_dists: Vec<Option<f64>>,
    pub steps: Vec<f64>,
    /// iPiano potential `F_δ(x^k, x^{k−1})`.
    pub potentials: Option<Vec<f64>>,
    pub stopping: StoppingMeasure,
    pub converged: bool,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.objectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objectives.is_empty()
    }

    pub fn last_iterate(&self) -> Option<&Vector> {
        self.iterates.last()
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.objectives.last().copied()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }

    /// Number of proximal steps taken.
    pub fn iterations(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub(crate) fn push(&mut self, row: TraceRow) {
        self.iterates.push(row.iterate);
        self.objectives.push(row.objective);
        self.residuals.push(row.residual);
        self.step_residuals.push(row.step_residual);
        self.subgrad_dists.push(row.subgrad_dist);
        self.steps.push(row.step);
        if let Some(p) = row.potential {
            self.potentials.get_or_insert_with(Vec::new).push(p);
        }
    }
}

pub(crate) struct TraceRow {
    pub iterate: Vector,
    pub objective: f64,
    pub residual: f64,
    pub step_residual: f64,
    pub subgrad_dist: Option<f64>,
    pub step: f64,
    pub potential: Option<f64>,
}
