use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the model-reduction toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument's dimensions do not match what the operation requires.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Time integration produced a non-finite or unbounded state.
    #[error("integration diverged at t = {time:.6}: state left the finite range")]
    IntegrationDiverged { time: f64 },

    /// Input data carries no usable information (e.g. an all-zero snapshot matrix).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// The reference signal is identically zero, so a relative error is undefined.
    #[error("reference output is identically zero; relative error is undefined")]
    ZeroReferenceNorm,

    /// A scalar argument is outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A structured text file could not be parsed.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Network parameters violate a model invariant.
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    /// Underlying filesystem failure.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
