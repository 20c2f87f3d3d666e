use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, NematicError>;

#[derive(Debug, Error)]
pub enum NematicError {
    /// A precondition on a physical or numerical input was violated.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    /// The leading eigenvalue is (numerically) not simple, so a director is undefined.
    #[error("degenerate eigen-direction at {0}")]
    Degenerate(String),

    #[error("divergence after {iterations} iterations: {reason}")]
    Divergence { iterations: usize, reason: String },

    #[error("not converged after {iterations} iterations (residual {residual:e} > tol {tol:e})")]
    NotConverged { iterations: usize, residual: f64, tol: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl NematicError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        NematicError::Domain(msg.into())
    }
}
