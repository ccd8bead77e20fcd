//! Asymptotic covariance matrices `Σ` of vectors of covariance estimates.

mod block;
mod cumulant;
mod kernel;
mod lemma1;
mod model;
mod plugin;

use std::fmt;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::numeric::sig6;

pub use block::{sigma_block_subsample_lattice, sigma_block_subsample_station};
pub use cumulant::{isserlis_fourth_moment, q_cumulant};
pub use kernel::{sigma_kernel_theoretical, KernelLags, LAG_EQ_TOL};
pub use lemma1::{lemma1_cov_pair, sigma_station_gaussian, Lemma1Index};
pub use model::{CrossCovModel, FnCrossCov, VarCrossCov};
pub use plugin::{sigma_lattice_plugin, PluginWindow};

/// Normalization under which `Σ = lim scale · cov(Ĝ_n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scaling {
    /// `|D_n|`, number of lattice points.
    LatticeSize,
    /// `|T_n|`, number of time points.
    TimeLength,
    /// `|T_n| |S_n| λ²`.
    KernelSpaceTime { lambda: f64 },
    /// `λ³ |D_n|`.
    Kernel3d { lambda: f64 },
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scaling::LatticeSize => f.write_str("|D_n|"),
            Scaling::TimeLength => f.write_str("|T_n|"),
            Scaling::KernelSpaceTime { lambda } => write!(f, "|T_n||S_n|lambda^2 (lambda={lambda})"),
            Scaling::Kernel3d { lambda } => write!(f, "lambda^3|D_n| (lambda={lambda})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaMethod {
    Lemma1Gaussian,
    PluginTruncated,
    KernelTheoretical,
    BlockSubsample,
    Empirical,
}

impl fmt::Display for SigmaMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SigmaMethod::Lemma1Gaussian => "lemma1-gaussian",
            SigmaMethod::PluginTruncated => "plugin-truncated",
            SigmaMethod::KernelTheoretical => "kernel-theoretical",
            SigmaMethod::BlockSubsample => "block-subsample",
            SigmaMethod::Empirical => "empirical",
        })
    }
}

/// How far an infinite lag sum is carried.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// Sum over `|r| ≤ r_max`.
    Fixed(usize),
    /// Stop once the summand stays below `1e-12` for 5 consecutive `|r|`
    /// past the shift of the lags, or at `|r| = 10⁴`.
    Auto,
}

pub(crate) const AUTO_TOL: f64 = 1e-12;
pub(crate) const AUTO_RUN: usize = 5;
pub(crate) const AUTO_CAP: usize = 10_000;

/// Sum `term(r)` over `r ∈ Z` with the given truncation; `shift` is the
/// largest offset at which the summand may still be growing.
pub(crate) fn lag_sum(trunc: Truncation, shift: usize, term: impl Fn(i64) -> f64) -> f64 {
    let mut total = term(0);
    match trunc {
        Truncation::Fixed(r_max) => {
            for r in 1..=r_max as i64 {
                total += term(r) + term(-r);
            }
        }
        Truncation::Auto => {
            let mut quiet = 0;
            for r in 1..=AUTO_CAP as i64 {
                let pair = term(r) + term(-r);
                total += pair;
                if r as usize > shift && term(r).abs() < AUTO_TOL && term(-r).abs() < AUTO_TOL {
                    quiet += 1;
                    if quiet >= AUTO_RUN {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
        }
    }
    total
}

/// An `m × m` asymptotic covariance matrix labelled by its lags.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaMatrix {
    pub values: DMatrix<f64>,
    pub labels: Vec<String>,
    pub scaling: Scaling,
    pub method: SigmaMethod,
    /// Largest `|Σ_ij − Σ_ji|` seen before symmetrization.
    pub asymmetry: f64,
}

impl SigmaMatrix {
    pub(crate) fn from_raw(
        mut values: DMatrix<f64>,
        labels: Vec<String>,
        scaling: Scaling,
        method: SigmaMethod,
    ) -> Self {
        let asymmetry = crate::numeric::symmetrize(&mut values);
        Self {
            values,
            labels,
            scaling,
            method,
            asymmetry,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Smallest eigenvalue; truncated sums need not be positive definite.
    pub fn smallest_eigenvalue(&self) -> f64 {
        self.values.clone().symmetric_eigen().eigenvalues.min()
    }

    /// CSV with a header row of lag labels and one row per lag.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["lag".to_string()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.dim() {
            let mut row = vec![self.labels[i].clone()];
            row.extend((0..self.dim()).map(|j| sig6(self.values[(i, j)])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

impl fmt::Display for SigmaMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Sigma ({}, scaled by {})", self.method, self.scaling)?;
        for i in 0..self.dim() {
            write!(f, "  {:<16}", self.labels[i])?;
            for j in 0..self.dim() {
                write!(f, " {:>12}", sig6(self.values[(i, j)]))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lag_sum_geometric() {
        let exact = (1.0 + 0.5) / (1.0 - 0.5); // Σ_r 0.5^|r|
        let s = lag_sum(Truncation::Auto, 0, |r| 0.5f64.powi(r.unsigned_abs() as i32));
        assert!((s - exact).abs() < 1e-11);
        let f = lag_sum(Truncation::Fixed(1), 0, |r| 0.5f64.powi(r.unsigned_abs() as i32));
        assert_eq!(f, 2.0);
    }

    #[test]
    fn csv_round_trip_header() {
        let s = SigmaMatrix::from_raw(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]),
            vec!["a".into(), "b".into()],
            Scaling::TimeLength,
            SigmaMethod::Lemma1Gaussian,
        );
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "lag,a,b");
        assert_eq!(text.lines().nth(2).unwrap(), "b,0.500000,2.00000");
        assert!((s.smallest_eigenvalue() - (1.5 - 0.5f64.sqrt())).abs() < 1e-12);
    }
}
