use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the estimators, simulators and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    MalformedRow { path: PathBuf, line: usize, msg: String },

    #[error("duplicate cell for site {site} at time {t}")]
    DuplicateCell { site: String, t: i64 },

    #[error("time range is not contiguous 1..n: {0}")]
    NonContiguousTime(String),

    #[error("non-finite value {value} at {at}")]
    NonFinite { value: f64, at: String },

    #[error("point {point:?} lies outside the region")]
    OutsideRegion { point: Vec<f64> },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid lag: {0}")]
    InvalidLag(String),

    #[error("no observation pairs for lag {0}")]
    EmptyPairSet(String),

    #[error("model is not stationary: spectral radius {0} >= 1")]
    NonStationary(f64),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:e}, largest {max_eig:e})")]
    NotPositiveDefinite { min_eig: f64, max_eig: f64 },

    #[error("duplicate location {0:?}")]
    DuplicateLocation(Vec<f64>),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
