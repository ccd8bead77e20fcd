//! VAR(1) space-time field `Z_t = R Z_{t-1} + ε_t` on a fixed site set.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use super::psd_factor;
use crate::datasets::{unit_grid, StationDataset};
use crate::error::{Error, Result};
use crate::numeric::{spectral_radius, symmetrize};

/// Above this many sites the Kronecker system `(I − R⊗R)` gets too large and
/// the stationary covariance is computed by the doubling recursion instead.
const KRONECKER_MAX_SITES: usize = 30;

/// Coefficients and innovation covariance of a spatial VAR(1) model.
#[derive(Clone, Debug, PartialEq)]
pub struct VarModelSpec {
    sites: Vec<[f64; 2]>,
    coef: DMatrix<f64>,
    sigma_eps: DMatrix<f64>,
    phi: f64,
}

impl VarModelSpec {
    /// Validates shapes, symmetry of `sigma_eps` and stationarity of `coef`.
    pub fn new(
        sites: Vec<[f64; 2]>,
        coef: DMatrix<f64>,
        sigma_eps: DMatrix<f64>,
        phi: f64,
    ) -> Result<Self> {
        let n = sites.len();
        if coef.shape() != (n, n) || sigma_eps.shape() != (n, n) {
            return Err(Error::InvalidArgument(format!(
                "{n} sites but R is {:?} and Σ_ε is {:?}",
                coef.shape(),
                sigma_eps.shape()
            )));
        }
        if (&sigma_eps - sigma_eps.transpose()).amax() > 1e-12 {
            return Err(Error::InvalidArgument("Σ_ε is not symmetric".into()));
        }
        let rho = spectral_radius(&coef);
        if rho >= 1.0 {
            return Err(Error::NonStationary(rho));
        }
        Ok(Self {
            sites,
            coef,
            sigma_eps,
            phi,
        })
    }

    /// The 3×3 unit grid model with range 1, self coefficient 0.2 and
    /// nearest-neighbour coefficient 0.1.
    pub fn table1() -> Self {
        build_var_model(3, 1.0, 0.2, 0.1).expect("reference model is stationary")
    }

    pub fn sites(&self) -> &[[f64; 2]] {
        &self.sites
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Autoregressive coefficient matrix `R`.
    pub fn coef(&self) -> &DMatrix<f64> {
        &self.coef
    }

    pub fn sigma_eps(&self) -> &DMatrix<f64> {
        &self.sigma_eps
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Unit grid of `grid_side²` sites; `R[i][i] = self_coef`, `R[i][j] =
/// neighbor_coef` for sites at distance 1, and `Σ_ε[i][j] = exp(−‖s_i − s_j‖/φ)`.
pub fn build_var_model(
    grid_side: usize,
    phi: f64,
    self_coef: f64,
    neighbor_coef: f64,
) -> Result<VarModelSpec> {
    if grid_side < 2 {
        return Err(Error::InvalidArgument(format!("grid_side must be >= 2, got {grid_side}")));
    }
    if !(phi > 0.0 && phi.is_finite()) {
        return Err(Error::InvalidArgument(format!("phi must be > 0, got {phi}")));
    }
    let sites = unit_grid(grid_side);
    let n = sites.len();
    let dist = |i: usize, j: usize| {
        let (a, b) = (sites[i], sites[j]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    };
    let coef = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            self_coef
        } else if (dist(i, j) - 1.0).abs() < 1e-12 {
            neighbor_coef
        } else {
            0.0
        }
    });
    let sigma_eps = DMatrix::from_fn(n, n, |i, j| (-dist(i, j) / phi).exp());
    VarModelSpec::new(sites, coef, sigma_eps, phi)
}

/// Stationary covariance `Γ` solving `Γ = R Γ Rᵀ + Σ_ε`, via the vectorized
/// system `(I − R⊗R) vec(Γ) = vec(Σ_ε)`.
pub fn stationary_cov(model: &VarModelSpec) -> Result<DMatrix<f64>> {
    let n = model.n_sites();
    let mut gamma = if n <= KRONECKER_MAX_SITES {
        let r = &model.coef;
        let system = DMatrix::<f64>::identity(n * n, n * n) - r.kronecker(r);
        // column-major storage is exactly vec(·)
        let rhs = DVector::from_column_slice(model.sigma_eps.as_slice());
        let sol = system
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("I − R⊗R is singular".into()))?;
        DMatrix::from_column_slice(n, n, sol.as_slice())
    } else {
        doubling_lyapunov(&model.coef, &model.sigma_eps)?
    };
    symmetrize(&mut gamma);
    Ok(gamma)
}

/// `Γ = Σ_k R^k Σ (R^k)ᵀ` by repeated squaring.
fn doubling_lyapunov(r: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut a = r.clone();
    let mut g = sigma.clone();
    for _ in 0..64 {
        let step = &a * &g * a.transpose();
        g += &step;
        a = &a * &a;
        if step.amax() <= 1e-17 * g.amax() {
            return Ok(g);
        }
    }
    Err(Error::Singular("doubling recursion for Γ did not converge".into()))
}

/// `cov(Z_t, Z_{t−τ}) = R^τ Γ`. Entry `(i, j)` is `C_{i,j}(τ) =
/// cov{Z(s_j, t), Z(s_i, t + τ)}`; negative lags use `C_{i,j}(−u) = C_{j,i}(u)`.
pub fn cross_cov(model: &VarModelSpec, tau: i64) -> Result<DMatrix<f64>> {
    if tau < 0 {
        return Err(Error::InvalidArgument(format!(
            "tau must be >= 0 (got {tau}); use the transpose of lag {}",
            -tau
        )));
    }
    let gamma = stationary_cov(model)?;
    Ok(model.coef.pow(tau as u32) * gamma)
}

/// Reusable sampler: factors of `Γ` and `Σ_ε` are computed once.
#[derive(Clone, Debug)]
pub struct VarSimulator {
    sites: Vec<[f64; 2]>,
    coef: DMatrix<f64>,
    start_factor: DMatrix<f64>,
    innov_factor: DMatrix<f64>,
}

impl VarSimulator {
    pub fn new(model: &VarModelSpec) -> Result<Self> {
        let gamma = stationary_cov(model)?;
        Ok(Self {
            sites: model.sites.clone(),
            coef: model.coef.clone(),
            start_factor: psd_factor(&gamma)?,
            innov_factor: psd_factor(&model.sigma_eps)?,
        })
    }

    /// `n` time steps. `Z_1 ~ N(0, Γ)` (stationary start, no burn-in).
    pub fn simulate_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DMatrix<f64> {
        let d = self.sites.len();
        let mut out = DMatrix::zeros(d, n);
        if n == 0 {
            return out;
        }
        let mut z = DVector::zeros(d);
        let mut next = DVector::zeros(d);
        let mut e = DVector::zeros(d);
        fill_normal(&mut e, rng);
        z.gemv(1.0, &self.start_factor, &e, 0.0);
        out.set_column(0, &z);
        for t in 1..n {
            fill_normal(&mut e, rng);
            next.gemv(1.0, &self.innov_factor, &e, 0.0);
            next.gemv(1.0, &self.coef, &z, 1.0);
            std::mem::swap(&mut z, &mut next);
            out.set_column(t, &z);
        }
        out
    }

    pub fn simulate(&self, n: usize, seed: u64) -> Result<StationDataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        StationDataset::from_values(self.sites.clone(), self.simulate_with(n, &mut rng))
    }
}

fn fill_normal<R: Rng + ?Sized>(v: &mut DVector<f64>, rng: &mut R) {
    for x in v.iter_mut() {
        *x = rng.sample(StandardNormal);
    }
}

/// Simulate `n` time steps of the model. Deterministic given `seed`
/// (ChaCha8 stream, ziggurat normals).
pub fn simulate_var(model: &VarModelSpec, n: usize, seed: u64) -> Result<StationDataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    VarSimulator::new(model)?.simulate(n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: fixed-point iteration of Γ ← RΓRᵀ + Σ_ε.
    fn fixed_point_gamma(model: &VarModelSpec) -> DMatrix<f64> {
        let r = model.coef();
        let mut g = model.sigma_eps().clone();
        for _ in 0..2000 {
            g = r * &g * r.transpose() + model.sigma_eps();
        }
        g
    }

    #[test]
    fn reference_model_shapes() {
        let m = VarModelSpec::table1();
        assert_eq!(m.n_sites(), 9);
        for i in 0..9 {
            assert_eq!(m.sigma_eps()[(i, i)], 1.0);
            assert!(m.coef().row(i).sum() <= 0.6 + 1e-15);
        }
        // centre site: self + 4 neighbours
        assert!((m.coef().row(4).sum() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn zero_coefficients() {
        let m = build_var_model(3, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(m.coef().amax(), 0.0);
        let g = stationary_cov(&m).unwrap();
        assert!((&g - m.sigma_eps()).amax() < 1e-15);
        assert_eq!(cross_cov(&m, 1).unwrap().amax(), 0.0);
    }

    #[test]
    fn four_by_four_range() {
        let m = build_var_model(4, 1.5, 0.2, 0.1).unwrap();
        assert_eq!(m.coef().shape(), (16, 16));
        // sites 0 and 1 are unit distance apart
        assert!((m.sigma_eps()[(0, 1)] - (-1.0f64 / 1.5).exp()).abs() < 1e-15);
    }

    #[test]
    fn non_stationary_rejected() {
        assert!(matches!(
            build_var_model(3, 1.0, 0.6, 0.2),
            Err(Error::NonStationary(_))
        ));
        assert!(build_var_model(1, 1.0, 0.2, 0.1).is_err());
        assert!(build_var_model(3, 0.0, 0.2, 0.1).is_err());
    }

    #[test]
    fn scalar_ar_closed_form() {
        let base = VarModelSpec::table1();
        let rho = 0.7;
        let m = VarModelSpec::new(
            base.sites().to_vec(),
            DMatrix::identity(9, 9) * rho,
            base.sigma_eps().clone(),
            1.0,
        )
        .unwrap();
        let g = stationary_cov(&m).unwrap();
        let want = base.sigma_eps() / (1.0 - rho * rho);
        assert!((g - want).amax() < 1e-12);
    }

    #[test]
    fn kronecker_agrees_with_fixed_point_and_lyapunov_residual() {
        let m = VarModelSpec::table1();
        let g = stationary_cov(&m).unwrap();
        let oracle = fixed_point_gamma(&m);
        assert!((&g - &oracle).amax() < 1e-8);
        let resid = &g - m.coef() * &g * m.coef().transpose() - m.sigma_eps();
        assert!(resid.norm() < 1e-10);
    }

    #[test]
    fn doubling_path_matches_kronecker() {
        let m = build_var_model(5, 1.2, 0.2, 0.1).unwrap();
        let direct = stationary_cov(&m).unwrap();
        let doubled = doubling_lyapunov(m.coef(), m.sigma_eps()).unwrap();
        assert!((direct - doubled).amax() < 1e-12);
        // 36 sites takes the doubling path
        let big = build_var_model(6, 1.0, 0.2, 0.1).unwrap();
        let g = stationary_cov(&big).unwrap();
        let resid = &g - big.coef() * &g * big.coef().transpose() - big.sigma_eps();
        assert!(resid.norm() < 1e-10);
    }

    #[test]
    fn negative_tau_is_an_error() {
        assert!(cross_cov(&VarModelSpec::table1(), -1).is_err());
    }

    #[test]
    fn same_seed_same_data() {
        let m = VarModelSpec::table1();
        let a = simulate_var(&m, 50, 7).unwrap();
        let b = simulate_var(&m, 50, 7).unwrap();
        let c = simulate_var(&m, 50, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_innovations_give_zero_field() {
        let base = VarModelSpec::table1();
        let m = VarModelSpec::new(
            base.sites().to_vec(),
            base.coef().clone(),
            DMatrix::zeros(9, 9),
            1.0,
        )
        .unwrap();
        let d = simulate_var(&m, 20, 1).unwrap();
        assert_eq!(d.values().amax(), 0.0);
    }
}
