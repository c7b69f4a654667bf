//! Composite optimization toolkit for objectives of the form `f = h + P`,
//! where `h(x) = l(Ax)` is a smooth loss and `P` is a structured, possibly
//! nonconvex regularizer.
//!
//! The crate provides
//! - a penalty catalog with exact proximal maps and subgradient-distance oracles,
//! - the proximal gradient method and constant-step iPiano,
//! - diagnostics that estimate KL exponents, fit linear rates and probe
//!   Luo-Tseng error bounds numerically,
//! - an experiment harness with presets, sweeps and CSV/JSON output.
//!
//! ```
//! use klprox::{CompositeObjective, Regularizer, SmoothLoss};
//! use klprox::solvers::{run_pg, PgConfig};
//! use ndarray::array;
//!
//! let loss = SmoothLoss::least_squares(array![[1.0, 0.0], [0.0, 1.0]], array![2.0, 0.1]).unwrap();
//! let obj = CompositeObjective::new(loss, Regularizer::L1 { mu: 1.0 }).unwrap();
//! let trace = run_pg(&obj, &array![0.0, 0.0], &PgConfig::default()).unwrap();
//! assert!(trace.converged);
//! assert!((trace.last_iterate().unwrap()[0] - 1.0).abs() < 1e-8);
//! ```

pub mod diagnostics;
pub mod envelope;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod losses;
pub mod objective;
pub mod regularizers;
pub mod solvers;
pub mod trace;

pub use error::{Error, Result};
pub use linalg::{ExtReal, Matrix, Vector};
pub use losses::{LossKind, SmoothLoss};
pub use objective::CompositeObjective;
pub use regularizers::{GroupBall, GroupNorm, Regularizer};
pub use trace::SolverTrace;
