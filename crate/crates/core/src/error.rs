use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {0} is too small (need at least 2)")]
    DimensionTooSmall(usize),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),

    #[error("covariance is indefinite (smallest eigenvalue {0:e})")]
    IndefiniteCovariance(f64),

    #[error("covariance matrix is singular")]
    SingularCovariance,

    #[error("pooled covariance has non-finite entries")]
    DegenerateCovariance,

    #[error("class {0} has no samples")]
    MissingClass(u8),

    #[error("class {class} has {count} samples, need at least {needed}")]
    TooFewSamples { class: u8, count: usize, needed: usize },

    #[error("discriminant signal is zero (|inv(sigma) nu| = {0:e})")]
    ZeroSignal(f64),

    #[error("zero resultant: source directions cancel out")]
    ZeroResultant,

    #[error("no source vectors supplied")]
    EmptySources,

    #[error("vector is not unit norm (norm {0})")]
    NotUnitVector(f64),

    #[error("vector is (numerically) zero")]
    ZeroVector,

    #[error("could not draw a non-degenerate projection vector after {0} attempts")]
    DegenerateDraw(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("too few windows for split: {0}")]
    TooFewWindows(String),

    #[error("need at least 5 nonzero paired differences, got {0}")]
    TooFewPairs(usize),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: invariant violated: {message}")]
    InvariantViolation { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
