//! Estimation of space-time covariance functions and of the asymptotic
//! covariance of the estimators.
//!
//! * [`datasets`]: lattice, station and point-pattern data, lags, CSV I/O.
//! * [`simulate`]: spatial VAR(1) fields, Poisson patterns, Gaussian fields.
//! * [`estimators`]: moment and kernel covariance estimators.
//! * [`asymcov`]: asymptotic covariance matrices of vectors of estimates.
//! * [`diagnostics`]: Mardia skewness and kurtosis of replicate vectors.
//! * [`harness`]: Monte Carlo experiments and reports.

pub mod asymcov;
pub mod datasets;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod numeric;
pub mod simulate;

pub use error::{Error, Result};
