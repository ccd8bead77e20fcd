//! Moment (sample-covariance) estimators on lattices and fixed stations.

use nalgebra::DMatrix;

use super::{CovEstimate, Regime};
use crate::datasets::{
    lattice_pair_set, LagClass, LagSet, LatticeDataset, SpaceTimeLag, StationDataset,
    DEFAULT_SITE_TOL,
};
use crate::error::{Error, Result};

/// `Ĉ(h, u) = |D_n(h, u)|⁻¹ Σ Z(s, t) Z(s + h, t + u)` over the lattice pair set.
pub fn moment_cov_lattice(data: &LatticeDataset, lag: &SpaceTimeLag) -> Result<CovEstimate> {
    let pairs = lattice_pair_set(data, lag)?;
    if pairs.is_empty() {
        return Err(Error::EmptyPairSet(lag.to_string()));
    }
    let v = data.values();
    let sum: f64 = pairs.iter().map(|&(i, j)| v[i] * v[j]).sum();
    Ok(CovEstimate {
        lag: lag.to_string(),
        value: sum / pairs.len() as f64,
        pair_count: pairs.len() as f64,
        regime: Regime::Lattice,
    })
}

/// Divisor used by the station estimator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StationDivisor {
    /// `|S(h)| · n`, summing `n − u` products per site pair.
    #[default]
    Full,
    /// `|S(h)| · (n − u)`.
    Unbiased,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationOptions {
    pub tol: f64,
    pub divisor: StationDivisor,
}

impl Default for StationOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_SITE_TOL,
            divisor: StationDivisor::Full,
        }
    }
}

fn station_pairs_checked(
    data_sites: &[[f64; 2]],
    n: usize,
    lag: &LagClass,
    tol: f64,
) -> Result<Vec<(usize, usize)>> {
    let u = lag.u();
    if u < 0 {
        return Err(Error::InvalidLag(format!(
            "station estimator needs u >= 0, got {u}"
        )));
    }
    if u as usize >= n {
        return Err(Error::InvalidLag(format!("u = {u} but only {n} time points")));
    }
    let pairs = lag.station_pairs(data_sites, tol);
    if pairs.is_empty() {
        return Err(Error::EmptyPairSet(lag.to_string()));
    }
    Ok(pairs)
}

fn station_sum(values: &DMatrix<f64>, pairs: &[(usize, usize)], u: usize) -> f64 {
    let n = values.ncols();
    let mut total = 0.0;
    for t in 0..n - u {
        let now = values.column(t);
        let later = values.column(t + u);
        for &(k, k2) in pairs {
            total += now[k] * later[k2];
        }
    }
    total
}

/// `Ĉ(h, u) = (|S(h)| |T_n|)⁻¹ Σ_{S(h)} Σ_{t=1}^{n−u} Z(s, t) Z(s + h, t + u)`.
///
/// For a [`LagClass::Norm`] lag the pair list is the union described there.
pub fn moment_cov_station(
    data: &StationDataset,
    lag: &LagClass,
    opts: &StationOptions,
) -> Result<CovEstimate> {
    let n = data.n_times();
    let pairs = station_pairs_checked(data.sites(), n, lag, opts.tol)?;
    let u = lag.u() as usize;
    let sum = station_sum(data.values(), &pairs, u);
    let time_div = match opts.divisor {
        StationDivisor::Full => n,
        StationDivisor::Unbiased => n - u,
    };
    Ok(CovEstimate {
        lag: lag.to_string(),
        value: sum / (pairs.len() * time_div) as f64,
        pair_count: (pairs.len() * (n - u)) as f64,
        regime: Regime::Station,
    })
}

/// Station estimator with pair lists resolved once, for repeated use on
/// datasets that share a site layout (Monte Carlo replicates, blocks).
#[derive(Clone, Debug)]
pub struct StationEstimator {
    n_sites: usize,
    lags: Vec<(usize, Vec<(usize, usize)>)>,
    divisor: StationDivisor,
    max_u: usize,
}

impl StationEstimator {
    pub fn new(sites: &[[f64; 2]], lags: &LagSet<LagClass>, opts: &StationOptions) -> Result<Self> {
        let mut resolved = Vec::with_capacity(lags.len());
        for lag in lags.iter() {
            if lag.u() < 0 {
                return Err(Error::InvalidLag(format!(
                    "station estimator needs u >= 0, got {}",
                    lag.u()
                )));
            }
            let pairs = lag.station_pairs(sites, opts.tol);
            if pairs.is_empty() {
                return Err(Error::EmptyPairSet(lag.to_string()));
            }
            resolved.push((lag.u() as usize, pairs));
        }
        let max_u = resolved.iter().map(|(u, _)| *u).max().unwrap_or(0);
        Ok(Self {
            n_sites: sites.len(),
            lags: resolved,
            divisor: opts.divisor,
            max_u,
        })
    }

    /// `Ĝ_n` for a `sites × n` value matrix.
    pub fn estimate(&self, values: &DMatrix<f64>) -> Result<Vec<f64>> {
        let n = values.ncols();
        if values.nrows() != self.n_sites {
            return Err(Error::InvalidArgument(format!(
                "expected {} sites, got {}",
                self.n_sites,
                values.nrows()
            )));
        }
        if self.max_u >= n {
            return Err(Error::InvalidLag(format!(
                "u = {} but only {n} time points",
                self.max_u
            )));
        }
        Ok(self
            .lags
            .iter()
            .map(|(u, pairs)| {
                let time_div = match self.divisor {
                    StationDivisor::Full => n,
                    StationDivisor::Unbiased => n - u,
                };
                station_sum(values, pairs, *u) / (pairs.len() * time_div) as f64
            })
            .collect())
    }

    /// Ordered site-pair list of lag `i`.
    pub fn pairs(&self, i: usize) -> &[(usize, usize)] {
        &self.lags[i].1
    }
}

/// Left and right factors of every product entering a moment estimator,
/// with the divisor the estimator applies.
#[derive(Clone, Debug, PartialEq)]
pub struct PairProducts {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub divisor: f64,
}

impl PairProducts {
    pub fn estimate(&self) -> f64 {
        self.left.iter().zip(&self.right).map(|(a, b)| a * b).sum::<f64>() / self.divisor
    }
}

pub fn lattice_pair_products(data: &LatticeDataset, lag: &SpaceTimeLag) -> Result<PairProducts> {
    let pairs = lattice_pair_set(data, lag)?;
    if pairs.is_empty() {
        return Err(Error::EmptyPairSet(lag.to_string()));
    }
    let v = data.values();
    Ok(PairProducts {
        left: pairs.iter().map(|&(i, _)| v[i]).collect(),
        right: pairs.iter().map(|&(_, j)| v[j]).collect(),
        divisor: pairs.len() as f64,
    })
}

pub fn station_pair_products(
    data: &StationDataset,
    lag: &LagClass,
    opts: &StationOptions,
) -> Result<PairProducts> {
    let n = data.n_times();
    let pairs = station_pairs_checked(data.sites(), n, lag, opts.tol)?;
    let u = lag.u() as usize;
    let mut left = Vec::with_capacity(pairs.len() * (n - u));
    let mut right = Vec::with_capacity(pairs.len() * (n - u));
    for t in 1..=n - u {
        for &(k, k2) in &pairs {
            left.push(data.value(k, t));
            right.push(data.value(k2, t + u));
        }
    }
    let time_div = match opts.divisor {
        StationDivisor::Full => n,
        StationDivisor::Unbiased => n - u,
    };
    Ok(PairProducts {
        left,
        right,
        divisor: (pairs.len() * time_div) as f64,
    })
}

/// Raw and mean-corrected estimates plus the pieces of their exact difference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanCorrected {
    /// `Ĉ`: zero-mean estimator.
    pub raw: f64,
    /// `Ĉ*`: products of `Z − Z̄`.
    pub corrected: f64,
    /// `Z̄`, the grand mean of the dataset.
    pub mean: f64,
    /// Average of the left factors `Z(x)` (same divisor as the estimator).
    pub m1: f64,
    /// Average of the right factors `Z(x + k)`.
    pub m2: f64,
    /// Number of products divided by the divisor (1 on lattices).
    pub scale: f64,
}

impl MeanCorrected {
    /// `Z̄·m₁ + Z̄·m₂ − Z̄²·scale`, which equals `Ĉ − Ĉ*` exactly.
    pub fn decomposition(&self) -> f64 {
        self.mean * self.m1 + self.mean * self.m2 - self.mean * self.mean * self.scale
    }
}

/// Mean-corrected version of a moment estimator. `raw` yields the products
/// of the uncorrected estimator; `mean` is the grand mean `Z̄_n` of the data.
pub fn mean_correct<F>(raw: F, mean: f64) -> Result<MeanCorrected>
where
    F: FnOnce() -> Result<PairProducts>,
{
    let p = raw()?;
    if p.left.is_empty() {
        return Err(Error::EmptyPairSet("mean correction".into()));
    }
    let d = p.divisor;
    let corrected = p
        .left
        .iter()
        .zip(&p.right)
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum::<f64>()
        / d;
    Ok(MeanCorrected {
        raw: p.estimate(),
        corrected,
        mean,
        m1: p.left.iter().sum::<f64>() / d,
        m2: p.right.iter().sum::<f64>() / d,
        scale: p.left.len() as f64 / d,
    })
}

pub fn mean_corrected_lattice(data: &LatticeDataset, lag: &SpaceTimeLag) -> Result<MeanCorrected> {
    mean_correct(|| lattice_pair_products(data, lag), data.mean())
}

pub fn mean_corrected_station(
    data: &StationDataset,
    lag: &LagClass,
    opts: &StationOptions,
) -> Result<MeanCorrected> {
    mean_correct(|| station_pair_products(data, lag, opts), data.mean())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::unit_grid;

    fn cube_1_to_8() -> LatticeDataset {
        // row-major: x fastest, then y, then t
        LatticeDataset::full_box(2, 2, 2, |p| (1 + p[0] + 2 * p[1] + 4 * (p[2] - 1)) as f64)
    }

    #[test]
    fn lattice_cube_example() {
        let d = cube_1_to_8();
        let lag = SpaceTimeLag::new([1.0, 0.0], 0).unwrap();
        let e = moment_cov_lattice(&d, &lag).unwrap();
        assert_eq!(e.value, 25.0);
        assert_eq!(e.pair_count, 4.0);
        let zero = moment_cov_lattice(&d, &SpaceTimeLag::zero()).unwrap();
        let mean_sq = (1..=8).map(|v| (v * v) as f64).sum::<f64>() / 8.0;
        assert_eq!(zero.value, mean_sq);
    }

    #[test]
    fn lattice_constant_field_and_empty_lag() {
        let d = LatticeDataset::full_box(3, 3, 4, |_| 1.5);
        for lag in [[1, 0, 0], [0, 1, 2], [-2, 1, -1]] {
            let l = SpaceTimeLag::new([lag[0] as f64, lag[1] as f64], lag[2]).unwrap();
            assert_eq!(moment_cov_lattice(&d, &l).unwrap().value, 2.25);
        }
        let far = SpaceTimeLag::new([3.0, 0.0], 0).unwrap();
        assert!(matches!(moment_cov_lattice(&d, &far), Err(Error::EmptyPairSet(_))));
    }

    #[test]
    fn station_single_site_hand_value() {
        let d = StationDataset::from_values(
            vec![[0.0, 0.0]],
            DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]),
        )
        .unwrap();
        let lag = LagClass::Vector(SpaceTimeLag::new([0.0, 0.0], 1).unwrap());
        let e = moment_cov_station(&d, &lag, &StationOptions::default()).unwrap();
        assert!((e.value - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.pair_count, 2.0);
        let unbiased = StationOptions {
            divisor: StationDivisor::Unbiased,
            ..Default::default()
        };
        assert_eq!(moment_cov_station(&d, &lag, &unbiased).unwrap().value, 4.0);
    }

    #[test]
    fn station_constant_and_zero_fields() {
        let sites = unit_grid(3);
        let c = 0.7;
        let d = StationDataset::from_values(sites.clone(), DMatrix::from_element(9, 5, c)).unwrap();
        let lag = LagClass::Vector(SpaceTimeLag::new([1.0, 0.0], 0).unwrap());
        let e = moment_cov_station(&d, &lag, &StationOptions::default()).unwrap();
        assert!((e.value - c * c).abs() < 1e-15);
        assert_eq!(e.pair_count, 30.0);
        let z = StationDataset::from_values(sites, DMatrix::zeros(9, 5)).unwrap();
        assert_eq!(moment_cov_station(&z, &lag, &StationOptions::default()).unwrap().value, 0.0);
    }

    #[test]
    fn station_errors() {
        let d = StationDataset::from_values(unit_grid(2), DMatrix::zeros(4, 3)).unwrap();
        let opts = StationOptions::default();
        let far = LagClass::Vector(SpaceTimeLag::new([5.0, 0.0], 0).unwrap());
        assert!(matches!(moment_cov_station(&d, &far, &opts), Err(Error::EmptyPairSet(_))));
        let late = LagClass::Norm { norm: 1.0, u: 3 };
        assert!(moment_cov_station(&d, &late, &opts).is_err());
        let neg = LagClass::Norm { norm: 1.0, u: -1 };
        assert!(moment_cov_station(&d, &neg, &opts).is_err());
    }

    #[test]
    fn cached_estimator_matches_direct() {
        let sites = unit_grid(3);
        let values = DMatrix::from_fn(9, 12, |i, t| ((i * 7 + t * 3) % 5) as f64 - 2.0);
        let d = StationDataset::from_values(sites.clone(), values.clone()).unwrap();
        let lags = LagSet::unit_norm_pair();
        let opts = StationOptions::default();
        let est = StationEstimator::new(&sites, &lags, &opts).unwrap();
        let g = est.estimate(&values).unwrap();
        for (i, lag) in lags.iter().enumerate() {
            assert_eq!(g[i], moment_cov_station(&d, lag, &opts).unwrap().value);
        }
    }

    #[test]
    fn mean_correction_zero_mean_is_identity() {
        // values symmetric around zero so Z̄ = 0 exactly
        let d = LatticeDataset::full_box(2, 2, 2, |p| {
            if (p[0] + p[1] + p[2]) % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        });
        assert_eq!(d.mean(), 0.0);
        let lag = SpaceTimeLag::new([1.0, 0.0], 0).unwrap();
        let mc = mean_corrected_lattice(&d, &lag).unwrap();
        assert_eq!(mc.raw, mc.corrected);
    }

    #[test]
    fn station_mean_correction_decomposition() {
        let values = DMatrix::from_fn(9, 20, |i, t| ((i * 13 + t * 7) % 11) as f64 * 0.3 + 1.0);
        let d = StationDataset::from_values(unit_grid(3), values).unwrap();
        let lag = LagClass::Norm { norm: 1.0, u: 1 };
        let mc = mean_corrected_station(&d, &lag, &StationOptions::default()).unwrap();
        assert!((mc.raw - mc.corrected - mc.decomposition()).abs() < 1e-12);
    }
}
