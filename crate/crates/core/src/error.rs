use std::path::PathBuf;

use thiserror::Error;

use crate::trace::SolverTrace;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate neighborhood: {0}")]
    DegenerateNeighborhood(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("outside the rule's hypotheses: {0}")]
    OutOfHypothesis(String),

    /// The solver produced an iterate outside the domain of `h`. The trace
    /// recorded up to that point is kept.
    #[error("iterate left the domain at iteration {iteration}: {reason}")]
    IterateEscaped {
        iteration: usize,
        reason: String,
        partial: Box<SolverTrace>,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("could not parse {what}: {message}")]
    Parse { what: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            what: what.into(),
            message: message.to_string(),
        }
    }
}
