use thiserror::Error;

/// Errors raised by the geometric routines and experiment drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index out of range: {0}")]
    Range(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The query lies within the on-set threshold of the target set; the
    /// caller must take the identity branch.
    #[error("query is on the set (distance {distance:e})")]
    OnSet { distance: f64 },

    #[error("tolerance not reached: {0}")]
    ToleranceFailure(String),

    #[error("iteration cap of {cap} exceeded in {routine}")]
    IterationCap { routine: &'static str, cap: usize },

    #[error("rejection sampler starved after {attempts} attempts: {context}")]
    RejectionStarvation { attempts: usize, context: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty intersection: {0}")]
    EmptyIntersection(String),

    #[error("zero-diameter input")]
    ZeroDiameter,

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
