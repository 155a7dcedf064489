use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of a formula or operation.
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    /// One or more model parameters violate their invariants.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    /// Adaptive quadrature hit its interval cap before reaching tolerance.
    #[error("quadrature did not converge: estimate {estimate}, error {error} > {tolerance}")]
    Quadrature {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    /// A statistical procedure was given too few samples.
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    /// A query fell outside the range covered by a sampled object.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// The linear system assembled by a solver is singular or badly scaled.
    #[error("solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
