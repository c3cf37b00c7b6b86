//! Crate-wide error type.
//!
//! Every fallible operation in the toolkit returns [`Error`]. Variants are
//! coarse on purpose: callers branch on the *kind* of failure (bad input,
//! not enough data, solver gave up), while the message carries the specifics
//! for logs and the CLI's machine-readable error output.

use thiserror::Error;

/// Alias for results produced by this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared across the toolkit.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested quantity is undefined for the given distribution.
    #[error("unsupported distribution: {0}")]
    UnsupportedDistribution(String),

    /// Too few observations to evaluate the estimator.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The estimator's defining equation has no admissible solution.
    #[error("estimate undefined: {0}")]
    UndefinedEstimate(String),

    /// An iterative solver exhausted its budget without meeting tolerance.
    /// The payload reports the best iterate found.
    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    /// A matrix required by the computation is singular or indefinite.
    #[error("singular system: {0}")]
    Singular(String),

    /// A scenario description cannot be realized geometrically.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Malformed input file or serialized payload.
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag for the CLI's JSON error channel.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::UnsupportedDistribution(_) => "unsupported_distribution",
            Error::InsufficientData(_) => "insufficient_data",
            Error::UndefinedEstimate(_) => "undefined_estimate",
            Error::ConvergenceFailure(_) => "convergence_failure",
            Error::Singular(_) => "singular_system",
            Error::InvalidScenario(_) => "invalid_scenario",
            Error::Parse(_) => "parse_error",
            Error::Io(_) => "io_error",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
