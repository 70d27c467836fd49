use thiserror::Error;

/// Errors shared across the estimation modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a precondition (non-finite entries, wrong shape, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A caller-supplied parameter is out of range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Screening returned too few pivotal variables for the requested stage.
    #[error("degenerate screening: detected {found} pivotal variables, need at least {need}")]
    DegenerateScreening { found: usize, need: usize },

    /// A generative model produced an unusable covariance matrix.
    #[error("generator error: {0}")]
    Generator(String),
}

pub type Result<T> = std::result::Result<T, Error>;
