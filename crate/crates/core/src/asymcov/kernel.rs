use nalgebra::DMatrix;

use super::{lag_sum, Scaling, SigmaMatrix, SigmaMethod, Truncation};
use crate::datasets::{LagSet, SpaceTimeLag};
use crate::error::{Error, Result};
use crate::estimators::KernelSpec;
use crate::simulate::GaussianFieldSpec;

/// Two continuous lags are treated as equal when every coordinate differs
/// by at most this much.
pub const LAG_EQ_TOL: f64 = 1e-9;

/// Lags of a kernel estimator: spatial lag plus integer time lag, or a
/// single 3-d lag.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelLags {
    SpaceTime(LagSet<SpaceTimeLag>),
    Full3d(Vec<[f64; 3]>),
}

impl KernelLags {
    pub fn len(&self) -> usize {
        match self {
            KernelLags::SpaceTime(l) => l.len(),
            KernelLags::Full3d(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            KernelLags::SpaceTime(l) => l.labels(),
            KernelLags::Full3d(l) => l.iter().map(|k| format!("k=({},{},{})", k[0], k[1], k[2])).collect(),
        }
    }
}

fn same(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= LAG_EQ_TOL)
}

fn opposite(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x + y).abs() <= LAG_EQ_TOL)
}

/// Limit covariance of kernel estimators for a Gaussian field.
///
/// Space-time lags: entry `(i, j)` is
/// `ν⁻² ∫w² Σ_t [S₁ I(h_i = h_j) + S₂ I(h_i = −h_j)]` where `S₁`, `S₂` are the
/// connected (Isserlis) parts of `E{Z(0,0)Z(h_i,u_i)Z(0,t)Z(h_i,t+u_j)}` and
/// `E{Z(0,0)Z(h_i,u_i)Z(h_i,t)Z(0,t+u_j)}`; the scaling is `|T_n||S_n|λ²`.
///
/// 3-d lags: entry `(i, j)` is
/// `ν⁻² ∫w² {C(0)² + 2C(k_i)²} [I(k_i = k_j) + I(k_i = −k_j)]`, scaled by
/// `λ³|D_n|`; the two indicators differ from `I(k_i = ±k_j)` only at `k = 0`.
pub fn sigma_kernel_theoretical(
    field: &GaussianFieldSpec,
    lags: &KernelLags,
    kernel: &KernelSpec,
    nu: f64,
    trunc: Truncation,
) -> Result<SigmaMatrix> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidArgument(format!("intensity must be > 0, got {nu}")));
    }
    if lags.is_empty() {
        return Err(Error::InvalidArgument("empty lag set".into()));
    }
    let m = lags.len();
    let pre = kernel.square_integral() / (nu * nu);
    let mut values = DMatrix::zeros(m, m);
    let scaling = match lags {
        KernelLags::SpaceTime(set) => {
            if kernel.dim() != 2 {
                return Err(Error::InvalidArgument("space-time lags need a 2-d kernel".into()));
            }
            let c = |a: ([f64; 2], i64), b: ([f64; 2], i64)| {
                field.cov([b.0[0] - a.0[0], b.0[1] - a.0[1]], (b.1 - a.1) as f64)
            };
            let origin = ([0.0, 0.0], 0i64);
            for (i, li) in set.iter().enumerate() {
                for (j, lj) in set.iter().enumerate() {
                    let (h, ui, uj) = (li.h, li.u, lj.u);
                    let b = (h, ui);
                    let shift = (ui.unsigned_abs() + uj.unsigned_abs()) as usize;
                    let mut total = 0.0;
                    if same(&li.h, &lj.h) {
                        total += lag_sum(trunc, shift, |t| {
                            let (cc, d) = (([0.0, 0.0], t), (h, t + uj));
                            c(origin, cc) * c(b, d) + c(origin, d) * c(b, cc)
                        });
                    }
                    if opposite(&li.h, &lj.h) {
                        total += lag_sum(trunc, shift, |t| {
                            let (cc, d) = ((h, t), ([0.0, 0.0], t + uj));
                            c(origin, cc) * c(b, d) + c(origin, d) * c(b, cc)
                        });
                    }
                    values[(i, j)] = pre * total;
                }
            }
            Scaling::KernelSpaceTime {
                lambda: kernel.lambda(),
            }
        }
        KernelLags::Full3d(set) => {
            if kernel.dim() != 3 {
                return Err(Error::InvalidArgument("3-d lags need a 3-d kernel".into()));
            }
            let c0 = field.cov3([0.0; 3]);
            for (i, ki) in set.iter().enumerate() {
                for (j, kj) in set.iter().enumerate() {
                    // At k = 0 both indicators hold: every pair enters the
                    // estimator in both orientations.
                    let hits = same(ki, kj) as u8 + opposite(ki, kj) as u8;
                    if hits > 0 {
                        let ck = field.cov3(*ki);
                        values[(i, j)] = pre * hits as f64 * (c0 * c0 + 2.0 * ck * ck);
                    }
                }
            }
            Scaling::Kernel3d {
                lambda: kernel.lambda(),
            }
        }
    };
    Ok(SigmaMatrix::from_raw(
        values,
        lags.labels(),
        scaling,
        SigmaMethod::KernelTheoretical,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn far_lag_diagonal_and_sparsity_3d() {
        let field = GaussianFieldSpec::squared_exponential(2.0, 0.3).unwrap();
        let k = KernelSpec::gaussian(3, 0.1).unwrap();
        let lags = KernelLags::Full3d(vec![[50.0, 0.0, 0.0], [0.5, 0.0, 0.0], [-0.5, 0.0, 0.0], [0.0, 0.5, 0.0]]);
        let s = sigma_kernel_theoretical(&field, &lags, &k, 2.0, Truncation::Auto).unwrap();
        let w2 = 1.0 / (8.0 * PI.powf(1.5));
        assert!((s.get(0, 0) - w2 * 4.0 / 4.0).abs() < 1e-15);
        assert_ne!(s.get(1, 2), 0.0);
        assert_eq!(s.get(1, 3), 0.0);
        assert_eq!(s.get(0, 1), 0.0);
    }

    #[test]
    fn zero_lag_counts_both_orientations() {
        let field = GaussianFieldSpec::squared_exponential(1.0, 0.5).unwrap();
        let k = KernelSpec::gaussian(3, 0.2).unwrap();
        let lags = KernelLags::Full3d(vec![[0.0; 3], [1e-3, 0.0, 0.0]]);
        let s = sigma_kernel_theoretical(&field, &lags, &k, 1.0, Truncation::Auto).unwrap();
        // 2 · 3C(0)² against 3C(0)² + O(k²)
        assert!((s.get(0, 0) / s.get(1, 1) - 2.0).abs() < 1e-5);
    }

    #[test]
    fn space_time_sparsity_and_white_time() {
        // exponential field with a tiny temporal range is nearly white in time
        let field = GaussianFieldSpec::exponential(1.0, 1.0, 1e-3).unwrap();
        let k = KernelSpec::gaussian(2, 0.5).unwrap();
        let l = |x: f64, y: f64, u: i64| SpaceTimeLag::new([x, y], u).unwrap();
        let set = LagSet::new(vec![l(1.0, 0.0, 0), l(-1.0, 0.0, 0), l(0.0, 1.0, 0)]).unwrap();
        let s = sigma_kernel_theoretical(&field, &KernelLags::SpaceTime(set), &k, 1.0, Truncation::Auto).unwrap();
        assert_eq!(s.get(0, 2), 0.0);
        assert_eq!(s.get(1, 2), 0.0);
        // only t = 0 survives, where S₁ = S₂ = C(0,0)² + C(h,0)²
        let ch = (-1.0f64).exp();
        let w2 = 1.0 / (4.0 * PI);
        assert!((s.get(0, 0) - w2 * (1.0 + ch * ch)).abs() < 1e-12);
        assert!((s.get(0, 1) - w2 * (1.0 + ch * ch)).abs() < 1e-12);
    }
}
