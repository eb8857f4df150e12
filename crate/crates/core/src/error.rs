//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the numeric engine.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid parameters or inputs outside an operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Root finding ran out of iterations; carries the final bracket.
    #[error("{context}: no convergence after {iterations} iterations, bracket [{lo}, {hi}]")]
    NoConvergence {
        context: &'static str,
        iterations: usize,
        lo: f64,
        hi: f64,
    },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: requested {requested:e}, achieved {achieved:e}")]
    QuadratureNonConvergence { requested: f64, achieved: f64 },

    /// An integral diverges (for example a Pareto tail with index <= 1).
    #[error("non-integrable: {0}")]
    NonIntegrable(String),

    /// Malformed input data; carries the 1-based line number.
    #[error("input error at line {line}: {message}")]
    Input { line: usize, message: String },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
