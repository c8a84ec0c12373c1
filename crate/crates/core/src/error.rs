use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested region is a half-plane (a radius mapped onto the unit circle).
    #[error("degenerate region: {0}")]
    Degenerate(String),

    #[error("evaluation at the source location {0}")]
    AtSource(String),

    /// The source expansion or the mode solution did not reach the requested
    /// tolerance before hitting the mode cap.
    #[error("truncation failure: tolerance {tol:e} not met within {cap} modes")]
    Truncation { tol: f64, cap: usize },

    /// A per-mode interface system is singular (only possible without loss).
    #[error("singular interface system for mode {mode}")]
    ResonanceSingularity { mode: i64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
