use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the navigation stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rotation is too close to pi for a unique logarithm (trace = {trace})")]
    NearPiRotation { trace: f64 },

    #[error("latitude {0} rad is outside [-pi/2, pi/2]")]
    InvalidLatitude(f64),

    #[error("sample time {sample} s does not advance past state time {state} s")]
    NonMonotonicTime { state: f64, sample: f64 },

    #[error("attitude correction of {0} rad is not below pi/2")]
    CorrectionTooLarge(f64),

    #[error("covariance lost symmetry or positive semi-definiteness: {0}")]
    CovarianceNotPsd(String),

    #[error("innovation covariance is singular")]
    SingularInnovationCovariance,

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("dataset error in {file} at row {row}: {reason}")]
    Dataset {
        file: String,
        row: usize,
        reason: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn dataset(file: impl Into<String>, row: usize, reason: impl Into<String>) -> Self {
        Error::Dataset {
            file: file.into(),
            row,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidLatitude(_) => 2,
            Error::Dataset { .. } | Error::Io { .. } | Error::NonMonotonicTime { .. } => 3,
            Error::NearPiRotation { .. }
            | Error::CorrectionTooLarge(_)
            | Error::CovarianceNotPsd(_)
            | Error::SingularInnovationCovariance => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
