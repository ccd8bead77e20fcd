//! Covariance estimators: moment estimators on lattices and fixed stations,
//! kernel estimators for irregularly sampled marks, mean correction, and
//! intensity and bandwidth helpers.

mod kernel;
mod moment;

pub use kernel::{
    default_bandwidth, estimate_intensity, kernel_cov_r3, kernel_cov_st, KernelKind, KernelSpec,
};
pub use moment::{
    lattice_pair_products, mean_correct, mean_corrected_lattice, mean_corrected_station,
    moment_cov_lattice, moment_cov_station, station_pair_products, MeanCorrected, PairProducts,
    StationDivisor, StationEstimator, StationOptions,
};

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Lattice,
    Station,
    KernelSpaceTime,
    Kernel3d,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Lattice => "lattice",
            Regime::Station => "station",
            Regime::KernelSpaceTime => "kernel-st",
            Regime::Kernel3d => "kernel-3d",
        })
    }
}

/// One covariance estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct CovEstimate {
    /// Display label of the lag or lag class.
    pub lag: String,
    pub value: f64,
    /// Number of products for moment estimators; total kernel weight for
    /// kernel estimators.
    pub pair_count: f64,
    pub regime: Regime,
}
