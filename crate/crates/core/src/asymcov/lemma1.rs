use nalgebra::DMatrix;

use super::{lag_sum, CrossCovModel, Scaling, SigmaMatrix, SigmaMethod, Truncation};
use crate::datasets::{LagClass, LagSet};
use crate::error::{Error, Result};

/// Names the single-pair estimator `Ĉ_{i,j}(u) = n⁻¹ Σ_t Z(s_j, t) Z(s_i, t + u)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lemma1Index {
    pub i: usize,
    pub j: usize,
    pub u: i64,
}

impl Lemma1Index {
    /// The index of the station product `Z(s_k, t) Z(s_k', t + u)`.
    pub fn from_site_pair(k: usize, k2: usize, u: i64) -> Self {
        Self { i: k2, j: k, u }
    }
}

/// `lim n · cov{Ĉ_{i1,j1}(s), Ĉ_{i2,j2}(u)}` for a Gaussian series:
/// `Σ_r C_{j2,j1}(r) C_{i2,i1}(r+u−s) + C_{i2,j1}(r+u) C_{j2,i1}(r−s)`.
pub fn lemma1_cov_pair<M: CrossCovModel + ?Sized>(
    model: &M,
    a: Lemma1Index,
    b: Lemma1Index,
    trunc: Truncation,
) -> f64 {
    let (i1, j1, s) = (a.i, a.j, a.u);
    let (i2, j2, u) = (b.i, b.j, b.u);
    let shift = (u.unsigned_abs() + s.unsigned_abs()) as usize;
    lag_sum(trunc, shift, |r| {
        model.cross_cov(j2, j1, r) * model.cross_cov(i2, i1, r + u - s)
            + model.cross_cov(i2, j1, r + u) * model.cross_cov(j2, i1, r - s)
    })
}

/// `Σ = lim |T_n| cov(Ĝ_n)` of station moment estimators for a Gaussian
/// series: entry `(a, b)` is the average of [`lemma1_cov_pair`] over the
/// ordered site pairs of lags `a` and `b`.
pub fn sigma_station_gaussian<M: CrossCovModel + ?Sized>(
    model: &M,
    sites: &[[f64; 2]],
    lags: &LagSet<LagClass>,
    tol: f64,
    trunc: Truncation,
) -> Result<SigmaMatrix> {
    if model.n_sites() != sites.len() {
        return Err(Error::InvalidArgument(format!(
            "model has {} sites but {} locations were given",
            model.n_sites(),
            sites.len()
        )));
    }
    let mut pair_lists = Vec::with_capacity(lags.len());
    for lag in lags.iter() {
        let pairs = lag.station_pairs(sites, tol);
        if pairs.is_empty() {
            return Err(Error::EmptyPairSet(lag.to_string()));
        }
        let idx: Vec<Lemma1Index> = pairs
            .iter()
            .map(|&(k, k2)| Lemma1Index::from_site_pair(k, k2, lag.u()))
            .collect();
        pair_lists.push(idx);
    }
    let m = lags.len();
    let mut values = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let mut total = 0.0;
            for &p in &pair_lists[a] {
                for &q in &pair_lists[b] {
                    total += lemma1_cov_pair(model, p, q, trunc);
                }
            }
            values[(a, b)] = total / (pair_lists[a].len() * pair_lists[b].len()) as f64;
        }
    }
    Ok(SigmaMatrix::from_raw(
        values,
        lags.labels(),
        Scaling::TimeLength,
        SigmaMethod::Lemma1Gaussian,
    ))
}
