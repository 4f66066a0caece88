use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("inadmissible profile: {0}")]
    Inadmissible(String),

    #[error("invalid right-hand side: {0}")]
    InvalidRhs(String),

    #[error("inconsistent mask at node ({i}, {j})")]
    InconsistentMask { i: usize, j: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("shape mismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("solver failed after {iterations} iterations (relative residual {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("flow stagnated at t = {t:.6e} after {halvings} step halvings")]
    Stagnation { t: f64, halvings: usize },

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
