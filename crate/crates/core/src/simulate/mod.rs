//! Simulators: the spatial VAR(1) model, homogeneous Poisson patterns, and
//! Gaussian fields with a known covariance at irregular locations.
//!
//! Every sampler uses a ChaCha8 stream seeded from a `u64` and ziggurat
//! standard normals, so a given seed reproduces bit-identical output on any
//! platform. Monte Carlo replicates use seed `base + replicate_index`.

mod field;
mod poisson;
mod var;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use field::{
    simulate_convolution_field, simulate_convolution_field_with, simulate_gaussian_field,
    simulate_st_field, simulate_st_field_with, CovarianceFamily, GaussianFieldSpec,
};
pub use poisson::{sample_poisson, sample_poisson_with};
pub use var::{
    build_var_model, cross_cov, simulate_var, stationary_cov, VarModelSpec, VarSimulator,
};

/// Relative eigenvalue tolerance accepted before clamping to zero.
const PSD_TOL: f64 = 1e-10;

/// Factor `L` with `L Lᵀ = k` for a symmetric positive semidefinite `k`.
///
/// Cholesky first; if that fails, a symmetric eigendecomposition is used,
/// eigenvalues down to `−1e-10 · λ_max` are clamped to zero, and anything
/// more negative is rejected.
pub fn psd_factor(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(ch) = k.clone().cholesky() {
        return Ok(ch.l());
    }
    let eig = k.clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.max();
    let min_eig = eig.eigenvalues.min();
    if min_eig < -PSD_TOL * max_eig.max(0.0) {
        return Err(Error::NotPositiveDefinite { min_eig, max_eig });
    }
    let mut q = eig.eigenvectors;
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        q.column_mut(j).scale_mut(s);
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_factor_handles_singular_and_rejects_indefinite() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let l = psd_factor(&k).unwrap();
        assert!((&l * l.transpose() - &k).amax() < 1e-12);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(psd_factor(&bad), Err(Error::NotPositiveDefinite { .. })));
        let zero = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(psd_factor(&zero).unwrap().amax(), 0.0);
    }
}
