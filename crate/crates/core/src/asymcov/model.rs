use nalgebra::DMatrix;

use crate::error::Result;
use crate::simulate::{stationary_cov, VarModelSpec};

/// Cross-covariances `C_{i,j}(u) = cov{Z(s_j, t), Z(s_i, t + u)}` of a
/// stationary multivariate time series indexed by sites.
pub trait CrossCovModel: Sync {
    fn n_sites(&self) -> usize;

    fn cross_cov(&self, i: usize, j: usize, u: i64) -> f64;
}

/// Cross-covariances of a stable VAR(1) model, `C(u) = R^u Γ` for `u ≥ 0`,
/// tabulated until they vanish to working precision.
#[derive(Clone, Debug)]
pub struct VarCrossCov {
    lags: Vec<DMatrix<f64>>,
}

/// Powers are tabulated until the largest entry drops below this fraction of
/// the largest entry of `Γ`.
const TABLE_TOL: f64 = 1e-20;
const TABLE_CAP: usize = 10_000;

impl VarCrossCov {
    pub fn new(model: &VarModelSpec) -> Result<Self> {
        let gamma = stationary_cov(model)?;
        let scale = gamma.amax();
        let mut lags = vec![gamma];
        while lags.len() < TABLE_CAP {
            let next = model.coef() * lags.last().unwrap();
            if next.amax() <= TABLE_TOL * scale {
                break;
            }
            lags.push(next);
        }
        Ok(Self { lags })
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.lags[0]
    }
}

impl CrossCovModel for VarCrossCov {
    fn n_sites(&self) -> usize {
        self.lags[0].nrows()
    }

    fn cross_cov(&self, i: usize, j: usize, u: i64) -> f64 {
        let (a, b, k) = if u >= 0 { (i, j, u as usize) } else { (j, i, (-u) as usize) };
        self.lags.get(k).map_or(0.0, |m| m[(a, b)])
    }
}

/// A cross-covariance model given by a closure over `u ≥ 0`; negative lags
/// follow from `C_{i,j}(−u) = C_{j,i}(u)`.
pub struct FnCrossCov<F> {
    n_sites: usize,
    f: F,
}

impl<F: Fn(usize, usize, i64) -> f64 + Sync> FnCrossCov<F> {
    pub fn new(n_sites: usize, f: F) -> Self {
        Self { n_sites, f }
    }
}

impl<F: Fn(usize, usize, i64) -> f64 + Sync> CrossCovModel for FnCrossCov<F> {
    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn cross_cov(&self, i: usize, j: usize, u: i64) -> f64 {
        if u >= 0 {
            (self.f)(i, j, u)
        } else {
            (self.f)(j, i, -u)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::cross_cov;

    #[test]
    fn var_table_matches_cross_cov_and_symmetry() {
        let model = VarModelSpec::table1();
        let c = VarCrossCov::new(&model).unwrap();
        for u in 0..6 {
            let m = cross_cov(&model, u).unwrap();
            for i in 0..9 {
                for j in 0..9 {
                    assert!((c.cross_cov(i, j, u) - m[(i, j)]).abs() < 1e-14);
                    assert_eq!(c.cross_cov(i, j, -u), c.cross_cov(j, i, u));
                }
            }
        }
        assert_eq!(c.cross_cov(0, 0, 100_000), 0.0);
    }
}
