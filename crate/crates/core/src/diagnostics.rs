//! Mardia's multivariate skewness and kurtosis, and replicate covariances.

use nalgebra::{DMatrix, DVector};

use crate::asymcov::{Scaling, SigmaMatrix, SigmaMethod};
use crate::error::{Error, Result};
use crate::numeric::sample_covariance;

/// Eigenvalue ratio below which the sample covariance counts as singular.
const SINGULAR_RATIO: f64 = 1e-12;

/// Monte Carlo sample of `Ĝ_n`: one row per replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateMatrix {
    rows: Vec<Vec<f64>>,
    labels: Vec<String>,
    scale_n: f64,
    scaling: Scaling,
}

impl ReplicateMatrix {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<String>, scale_n: f64, scaling: Scaling) -> Result<Self> {
        let m = labels.len();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidArgument(format!(
                    "replicate {r} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    value: *v,
                    at: format!("replicate {r}"),
                });
            }
        }
        Ok(Self {
            rows,
            labels,
            scale_n,
            scaling,
        })
    }

    /// Unlabelled sample with time-length scaling, mainly for tests.
    pub fn from_rows(rows: Vec<Vec<f64>>, scale_n: f64) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        let labels = (1..=m).map(|i| format!("x{i}")).collect();
        Self::new(rows, labels, scale_n, Scaling::TimeLength)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_reps(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn scale_n(&self) -> f64 {
        self.scale_n
    }
}

/// Rows centred and whitened by the divisor-`n` sample covariance, so that
/// `(x_i − x̄)ᵀ S⁻¹ (x_j − x̄) = y_iᵀ y_j`.
fn whitened(sample: &ReplicateMatrix) -> Result<Vec<DVector<f64>>> {
    let n = sample.n_reps();
    let p = sample.dim();
    if n <= p {
        return Err(Error::Singular(format!("{n} replicates for dimension {p}")));
    }
    let s = sample_covariance(sample.rows(), n as f64);
    let eig = s.clone().symmetric_eigen();
    let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    if !(hi > 0.0) || lo <= SINGULAR_RATIO * hi {
        return Err(Error::Singular(format!(
            "sample covariance eigenvalues in [{lo:e}, {hi:e}]"
        )));
    }
    let chol = s
        .cholesky()
        .ok_or_else(|| Error::Singular("sample covariance is not positive definite".into()))?;
    let mut mean = DVector::zeros(p);
    for r in sample.rows() {
        mean += DVector::from_column_slice(r);
    }
    mean /= n as f64;
    let l = chol.l();
    Ok(sample
        .rows()
        .iter()
        .map(|r| {
            let d = DVector::from_column_slice(r) - &mean;
            l.solve_lower_triangular(&d).expect("Cholesky factor has a positive diagonal")
        })
        .collect())
}

/// `b₁,p = n⁻² Σ_i Σ_j [(x_i − x̄)ᵀ S⁻¹ (x_j − x̄)]³`, evaluated as
/// `Σ_{a,b,c} m_abc²` with `m_abc` the third moments of the whitened rows.
pub fn mardia_skewness(sample: &ReplicateMatrix) -> Result<f64> {
    let y = whitened(sample)?;
    let p = sample.dim();
    let n = y.len() as f64;
    let mut m3 = vec![0.0; p * p * p];
    for v in &y {
        for a in 0..p {
            for b in 0..p {
                let ab = v[a] * v[b];
                for c in 0..p {
                    m3[(a * p + b) * p + c] += ab * v[c];
                }
            }
        }
    }
    Ok(m3.iter().map(|m| (m / n) * (m / n)).sum())
}

/// `b₂,p = n⁻¹ Σ_i [(x_i − x̄)ᵀ S⁻¹ (x_i − x̄)]²`.
pub fn mardia_kurtosis(sample: &ReplicateMatrix) -> Result<f64> {
    let y = whitened(sample)?;
    let n = y.len() as f64;
    Ok(y.iter().map(|v| v.norm_squared().powi(2)).sum::<f64>() / n)
}

/// `scale_n` times the sample covariance of the replicates (divisor
/// `n_reps − 1`).
pub fn replicate_cov(sample: &ReplicateMatrix) -> Result<SigmaMatrix> {
    if sample.n_reps() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} replicates; need at least 2",
            sample.n_reps()
        )));
    }
    let cov: DMatrix<f64> = sample_covariance(sample.rows(), (sample.n_reps() - 1) as f64) * sample.scale_n();
    Ok(SigmaMatrix::from_raw(
        cov,
        sample.labels.clone(),
        sample.scaling,
        SigmaMethod::Empirical,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct double-sum evaluation of both statistics.
    fn brute(rows: &[Vec<f64>]) -> (f64, f64) {
        let n = rows.len();
        let s = sample_covariance(rows, n as f64);
        let inv = s.try_inverse().unwrap();
        let p = rows[0].len();
        let mean: Vec<f64> = (0..p).map(|a| rows.iter().map(|r| r[a]).sum::<f64>() / n as f64).collect();
        let d: Vec<DVector<f64>> = rows
            .iter()
            .map(|r| DVector::from_iterator(p, r.iter().zip(&mean).map(|(x, m)| x - m)))
            .collect();
        let g = |i: usize, j: usize| (d[i].transpose() * &inv * &d[j])[(0, 0)];
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for i in 0..n {
            for j in 0..n {
                b1 += g(i, j).powi(3);
            }
            b2 += g(i, i).powi(2);
        }
        (b1 / (n * n) as f64, b2 / n as f64)
    }

    #[test]
    fn three_points_match_double_sum() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let s = ReplicateMatrix::from_rows(rows.clone(), 1.0).unwrap();
        let (b1, b2) = brute(&rows);
        assert!((mardia_skewness(&s).unwrap() - b1).abs() < 1e-12);
        assert!((mardia_kurtosis(&s).unwrap() - b2).abs() < 1e-12);
        // n = p + 1 points: Σ_i g_ii = n p and all g_ii are equal, so b₂ = p²
        assert!((b2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn reflected_sample_has_zero_skewness() {
        let base = [[1.0, 0.3], [-0.2, 2.0], [0.7, -1.1], [2.5, 0.4]];
        let rows: Vec<Vec<f64>> = base
            .iter()
            .flat_map(|v| [vec![3.0 + v[0], -1.0 + v[1]], vec![3.0 - v[0], -1.0 - v[1]]])
            .collect();
        let s = ReplicateMatrix::from_rows(rows, 1.0).unwrap();
        assert!(mardia_skewness(&s).unwrap() < 1e-25);
    }

    #[test]
    fn singular_and_small_samples() {
        let line = ReplicateMatrix::from_rows(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]], 1.0).unwrap();
        assert!(matches!(mardia_kurtosis(&line), Err(Error::Singular(_))));
        let one = ReplicateMatrix::from_rows(vec![vec![1.0]], 1.0).unwrap();
        assert!(replicate_cov(&one).is_err());
    }

    #[test]
    fn replicate_cov_two_points() {
        let s = ReplicateMatrix::from_rows(vec![vec![1.0], vec![4.0]], 10.0).unwrap();
        assert!((replicate_cov(&s).unwrap().get(0, 0) - 10.0 * 9.0 / 2.0).abs() < 1e-12);
        let same = ReplicateMatrix::from_rows(vec![vec![0.3, 0.1]; 5], 7.0).unwrap();
        assert_eq!(replicate_cov(&same).unwrap().values.amax(), 0.0);
    }
}
