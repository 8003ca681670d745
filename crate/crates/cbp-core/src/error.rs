use thiserror::Error;

/// Errors surfaced by construction, algebra, and solve entry points.
///
/// Solver non-convergence is *not* an error: solve reports carry a
/// `converged` flag so callers can inspect partial results. `Error` is
/// reserved for structurally invalid inputs and unrecoverable algebra.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: left endpoint {s0} must be strictly below right endpoint {sf}")]
    InvalidInterval { s0: f64, sf: f64 },

    #[error("binomial coefficient degree {n} exceeds the supported limit of 60")]
    DegreeTooLarge { n: usize },

    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is singular (zero pivot at elimination step {step})")]
    SingularMatrix { step: usize },

    #[error("unknown example id {0} (known: 1-6)")]
    UnknownExample(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
