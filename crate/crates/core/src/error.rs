use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, BanditError>;

#[derive(Debug, Error)]
pub enum BanditError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("arm index {arm} out of range for {num_arms} arms")]
    InvalidArm { arm: usize, num_arms: usize },

    #[error("arm {arm} has zero probability mass")]
    ZeroMass { arm: usize },

    #[error("out-of-order round: expected {expected}, got {got}")]
    OutOfOrder { expected: u64, got: u64 },

    #[error("no rounds observed yet")]
    EmptyHistory,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rho puts mass on arm {arm} where mu is zero")]
    AbsoluteContinuity { arm: usize },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("unknown series '{0}'")]
    UnknownSeries(String),

    #[error("runs do not share a checkpoint schedule: {0}")]
    MismatchedSchedules(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl BanditError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        BanditError::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BanditError::Io {
            path: path.into(),
            source,
        }
    }
}
