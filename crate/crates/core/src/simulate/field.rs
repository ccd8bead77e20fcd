//! Gaussian fields with a known covariance, observed at irregular locations.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::psd_factor;
use crate::datasets::{MarkedPoint, PointDataset, PointMode, RegionSpec};
use crate::error::{Error, Result};

/// Covariance family of a [`GaussianFieldSpec`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CovarianceFamily {
    /// `exp(−‖h‖/φ_s) · exp(−|u|/φ_t)`.
    Exponential { phi_s: f64, phi_t: f64 },
    /// `exp(−(‖h‖² + u²) / (2ℓ²))`, isotropic in all three coordinates.
    SquaredExponential { length: f64 },
}

/// Stationary mean-zero Gaussian field, `C(h, u) = σ² · ρ(h, u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianFieldSpec {
    sigma2: f64,
    family: CovarianceFamily,
}

impl GaussianFieldSpec {
    pub fn exponential(sigma2: f64, phi_s: f64, phi_t: f64) -> Result<Self> {
        check_nonneg("sigma2", sigma2)?;
        check_pos("phi_s", phi_s)?;
        check_pos("phi_t", phi_t)?;
        Ok(Self {
            sigma2,
            family: CovarianceFamily::Exponential { phi_s, phi_t },
        })
    }

    pub fn squared_exponential(sigma2: f64, length: f64) -> Result<Self> {
        check_nonneg("sigma2", sigma2)?;
        check_pos("length", length)?;
        Ok(Self {
            sigma2,
            family: CovarianceFamily::SquaredExponential { length },
        })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn family(&self) -> CovarianceFamily {
        self.family
    }

    /// `C(h, u)`; `u` may be fractional when the third axis is continuous.
    pub fn cov(&self, h: [f64; 2], u: f64) -> f64 {
        self.sigma2 * self.spatial_corr(h[0].hypot(h[1])) * self.temporal_corr(u)
    }

    /// `C(k)` for a 3-d lag, third component on the time axis.
    pub fn cov3(&self, k: [f64; 3]) -> f64 {
        self.cov([k[0], k[1]], k[2])
    }

    fn spatial_corr(&self, d: f64) -> f64 {
        match self.family {
            CovarianceFamily::Exponential { phi_s, .. } => (-d / phi_s).exp(),
            CovarianceFamily::SquaredExponential { length } => {
                (-d * d / (2.0 * length * length)).exp()
            }
        }
    }

    fn temporal_corr(&self, u: f64) -> f64 {
        match self.family {
            CovarianceFamily::Exponential { phi_t, .. } => (-u.abs() / phi_t).exp(),
            CovarianceFamily::SquaredExponential { length } => {
                (-u * u / (2.0 * length * length)).exp()
            }
        }
    }
}

fn check_pos(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be > 0, got {x}")))
    }
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be >= 0, got {x}")))
    }
}

fn standard_normals<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Joint draw `N(0, K)` with `K[a][b] = C(x_a − x_b)` via a symmetric
/// factorization of `K`. Works for any layout but costs `O(N³)`.
pub fn simulate_gaussian_field(
    spec: &GaussianFieldSpec,
    locations: &[[f64; 3]],
    region: &RegionSpec,
    seed: u64,
) -> Result<PointDataset> {
    let mut sorted: Vec<[u64; 3]> = locations
        .iter()
        .map(|l| [l[0].to_bits(), l[1].to_bits(), l[2].to_bits()])
        .collect();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateLocation(w[0].iter().map(|&b| f64::from_bits(b)).collect()));
    }
    let n = locations.len();
    let k = DMatrix::from_fn(n, n, |a, b| {
        let (x, y) = (locations[a], locations[b]);
        spec.cov3([x[0] - y[0], x[1] - y[1], x[2] - y[2]])
    });
    let factor = psd_factor(&k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = factor * standard_normals(n, &mut rng);
    let points = locations
        .iter()
        .zip(z.iter())
        .map(|(loc, &value)| MarkedPoint { loc: *loc, value })
        .collect();
    PointDataset::new(region.mode(), points, region.clone())
}

/// Field on fixed spatial `sites` observed at every time `1..=n_time` of a
/// 2-d region. The covariance is separable, so `K = K_t ⊗ K_s` and the draw
/// `Z = L_s · E · L_tᵀ` is exact at `O(|S|³ + n³)` cost.
///
/// Points are ordered time-major: all sites at `t = 1`, then `t = 2`, ...
pub fn simulate_st_field_with<R: Rng + ?Sized>(
    spec: &GaussianFieldSpec,
    sites: &[[f64; 2]],
    region: &RegionSpec,
    rng: &mut R,
) -> Result<PointDataset> {
    let n_time = region
        .n_time()
        .ok_or_else(|| Error::InvalidRegion("space-time field needs a 2-d region with n_time".into()))?;
    let ns = sites.len();
    let k_s = DMatrix::from_fn(ns, ns, |a, b| {
        let (x, y) = (sites[a], sites[b]);
        spec.sigma2 * spec.spatial_corr((x[0] - y[0]).hypot(x[1] - y[1]))
    });
    let k_t = DMatrix::from_fn(n_time, n_time, |a, b| spec.temporal_corr(a as f64 - b as f64));
    let mut dup = sites.to_vec();
    dup.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    if let Some(w) = dup.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicateLocation(w[0].to_vec()));
    }
    let l_s = psd_factor(&k_s)?;
    let l_t = psd_factor(&k_t)?;
    let e = DMatrix::from_fn(ns, n_time, |_, _| rng.sample::<f64, _>(StandardNormal));
    let z = l_s * e * l_t.transpose();
    let mut points = Vec::with_capacity(ns * n_time);
    for t in 0..n_time {
        for (k, s) in sites.iter().enumerate() {
            points.push(MarkedPoint {
                loc: [s[0], s[1], (t + 1) as f64],
                value: z[(k, t)],
            });
        }
    }
    PointDataset::new(PointMode::SpaceTime, points, region.clone())
}

pub fn simulate_st_field(
    spec: &GaussianFieldSpec,
    sites: &[[f64; 2]],
    region: &RegionSpec,
    seed: u64,
) -> Result<PointDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_st_field_with(spec, sites, region, &mut rng)
}

/// Grid spacing of the white-noise lattice in units of the length scale.
const CONV_SPACING: f64 = 0.5;
/// Kernel truncation radius in units of the length scale.
const CONV_RADIUS: f64 = 5.0;

/// Squared-exponential field on a 3-d box built as a discrete process
/// convolution `Z(x) = A Σ_j exp(−‖x − c_j‖²/ℓ²) ξ_j` over a lattice of
/// i.i.d. standard normals `ξ_j` with spacing `ℓ/2`.
///
/// The result is exactly Gaussian; its covariance equals `C` up to a
/// relative error of about 1e-8 (lattice aliasing plus truncation at 5ℓ).
/// Cost is linear in the number of points, which makes it the practical
/// choice for thousands of locations.
pub fn simulate_convolution_field_with<R: Rng + ?Sized>(
    spec: &GaussianFieldSpec,
    locations: &[[f64; 3]],
    region: &RegionSpec,
    rng: &mut R,
) -> Result<PointDataset> {
    let CovarianceFamily::SquaredExponential { length } = spec.family else {
        return Err(Error::InvalidArgument(
            "process convolution needs the squared-exponential family".into(),
        ));
    };
    if region.dim() != 3 {
        return Err(Error::InvalidRegion("process convolution needs a 3-d region".into()));
    }
    let delta = CONV_SPACING * length;
    let reach = (CONV_RADIUS * length / delta).ceil() as i64;
    let lo = region.lower();
    let hi = region.upper();
    let origin: Vec<f64> = lo.iter().map(|a| a - reach as f64 * delta).collect();
    let dims: Vec<usize> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| ((b - a) / delta).ceil() as usize + 2 * reach as usize + 1)
        .collect();
    let total = dims[0] * dims[1] * dims[2];
    let noise: Vec<f64> = (0..total).map(|_| rng.sample(StandardNormal)).collect();

    let sigma_c = length / 2.0;
    let amp = spec.sigma2.sqrt() * (delta / (sigma_c * (2.0 * std::f64::consts::PI).sqrt())).powf(1.5);
    let inv_l2 = 1.0 / (length * length);
    let width = (2 * reach + 1) as usize;

    let mut w = [vec![0.0; width], vec![0.0; width], vec![0.0; width]];
    let mut base = [0i64; 3];
    let mut points = Vec::with_capacity(locations.len());
    for loc in locations {
        if !region.contains(loc) {
            return Err(Error::OutsideRegion { point: loc.to_vec() });
        }
        for d in 0..3 {
            let centre = ((loc[d] - origin[d]) / delta).round() as i64;
            base[d] = centre - reach;
            for (i, slot) in w[d].iter_mut().enumerate() {
                let c = origin[d] + (base[d] + i as i64) as f64 * delta;
                let dx = loc[d] - c;
                *slot = (-dx * dx * inv_l2).exp();
            }
        }
        let mut acc = 0.0;
        for (i, wx) in w[0].iter().enumerate() {
            let ix = (base[0] + i as i64) as usize;
            let mut acc_y = 0.0;
            for (j, wy) in w[1].iter().enumerate() {
                let iy = (base[1] + j as i64) as usize;
                let row = (ix * dims[1] + iy) * dims[2] + base[2] as usize;
                let line = &noise[row..row + width];
                let acc_z: f64 = line.iter().zip(&w[2]).map(|(n, wz)| n * wz).sum();
                acc_y += wy * acc_z;
            }
            acc += wx * acc_y;
        }
        points.push(MarkedPoint {
            loc: *loc,
            value: amp * acc,
        });
    }
    PointDataset::new(PointMode::Full3d, points, region.clone())
}

pub fn simulate_convolution_field(
    spec: &GaussianFieldSpec,
    locations: &[[f64; 3]],
    region: &RegionSpec,
    seed: u64,
) -> Result<PointDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_convolution_field_with(spec, locations, region, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_rule_properties() {
        let f = GaussianFieldSpec::exponential(2.0, 1.5, 3.0).unwrap();
        assert_eq!(f.cov([0.0, 0.0], 0.0), 2.0);
        assert_eq!(f.cov([1.0, -2.0], 3.0), f.cov([-1.0, 2.0], -3.0));
        assert!(f.cov([0.3, 0.1], 2.0) <= 2.0);
        // ‖h‖ = φ_s gives correlation e⁻¹
        assert!((f.cov([1.5, 0.0], 0.0) / 2.0 - (-1.0f64).exp()).abs() < 1e-15);
        assert!(GaussianFieldSpec::exponential(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn duplicate_locations_rejected() {
        let f = GaussianFieldSpec::exponential(1.0, 1.0, 1.0).unwrap();
        let r = RegionSpec::cube(2.0).unwrap();
        let locs = [[0.5, 0.5, 0.5], [1.0, 1.0, 1.0], [0.5, 0.5, 0.5]];
        assert!(matches!(
            simulate_gaussian_field(&f, &locs, &r, 1),
            Err(Error::DuplicateLocation(_))
        ));
    }

    #[test]
    fn st_field_layout() {
        let f = GaussianFieldSpec::exponential(1.0, 1.0, 1.0).unwrap();
        let r = RegionSpec::square(4.0, 3).unwrap();
        let sites = [[0.5, 0.5], [1.5, 2.0]];
        let d = simulate_st_field(&f, &sites, &r, 5).unwrap();
        assert_eq!(d.len(), 6);
        assert_eq!(d.points()[3].loc, [1.5, 2.0, 2.0]);
        assert_eq!(d.n_locations(), 2);
        assert_eq!(d, simulate_st_field(&f, &sites, &r, 5).unwrap());
    }

    #[test]
    fn convolution_needs_squared_exponential() {
        let f = GaussianFieldSpec::exponential(1.0, 1.0, 1.0).unwrap();
        let r = RegionSpec::cube(2.0).unwrap();
        assert!(simulate_convolution_field(&f, &[[1.0, 1.0, 1.0]], &r, 1).is_err());
    }

    #[test]
    fn zero_variance_field_is_zero() {
        let f = GaussianFieldSpec::exponential(0.0, 1.0, 1.0).unwrap();
        let r = RegionSpec::square(4.0, 2).unwrap();
        let d = simulate_st_field(&f, &[[1.0, 1.0], [2.0, 3.0]], &r, 9).unwrap();
        assert!(d.points().iter().all(|p| p.value == 0.0));
    }
}
