use std::path::PathBuf;

use crate::dataset::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed linear system: {0}")]
    MalformedSystem(String),

    #[error("simplex lost accuracy: phase-1 optimum {objective:e} but point residual {residual:e}")]
    NumericalFailure { objective: f64, residual: f64 },

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid JSON: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("validation failed:\n{0}")]
    Validation(ValidationReport),

    #[error("index {index} out of range for {what} (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("chain enumeration supports at most {max} experiments, got {k}")]
    InstanceTooLarge { k: usize, max: usize },

    #[error("chain cost is unbounded: standard NIAC fails on cycle {cycle:?}")]
    UnboundedCost { cycle: Vec<usize> },

    #[error("generator configuration: {0}")]
    Config(String),

    #[error("no NIAC violation found after {trials} perturbations")]
    NoViolationFound { trials: usize },
}
