//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input, with the position of the first offending entry.
    #[error("validation error at index {index}: {message}")]
    Validation { index: usize, message: String },

    /// The input is numerically degenerate (e.g. a nearly closed gap).
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    /// A quadrature or iteration did not reach the requested accuracy.
    #[error("accuracy failure ({context}): residual {residual:.3e}")]
    Accuracy { context: String, residual: f64 },

    /// An argument lies outside the domain of the operation.
    #[error("domain error at index {index}: {message}")]
    Domain { index: usize, message: String },

    /// An iterative solver did not converge.
    #[error("numerical failure after {iterations} iterations: {message}")]
    Numerical { iterations: usize, message: String },

    /// Division by a vanishing value at the requested point.
    #[error("pole encountered: {0}")]
    Pole(String),

    /// Evaluation at a band endpoint or on the spectrum.
    #[error("boundary error: {0}")]
    Boundary(String),

    /// The requested set or operator is outside the supported family.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Geometric inconsistency (overlapping circles, closed gap, ...).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A fit stagnated above tolerance; the residual history is attached.
    #[error("fit failure: residual history {history:?}")]
    FitFailure { history: Vec<f64> },

    /// Invalid caller-supplied argument.
    #[error("argument error: {0}")]
    Argument(String),

    /// Two samples cannot be distinguished at the working tolerance.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Two independent methods disagree.
    #[error("diagnostic mismatch: {message}; first = {first:?}, second = {second:?}")]
    Diagnostic {
        message: String,
        first: Vec<f64>,
        second: Vec<f64>,
    },

    /// Configuration file problems.
    #[error("config error: {0}")]
    Config(String),

    /// Work-size guard tripped.
    #[error("memory guard: {requested} items requested, cap is {cap}")]
    MemoryGuard { requested: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
