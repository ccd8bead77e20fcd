//! Kernel-smoothed covariance estimators for marks at irregular locations.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::{CovEstimate, Regime};
use crate::datasets::{PointDataset, PointMode, RegionSpec, SpaceTimeLag};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Gaussian weights beyond this many bandwidths are below 1e-15 of the peak
/// and are skipped.
const GAUSSIAN_CUTOFF: f64 = 8.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KernelKind {
    /// Standard normal density.
    #[default]
    Gaussian,
    /// Product of `0.75 (1 − x²)₊` in each coordinate.
    EpanechnikovProduct,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "epanechnikov" | "epanechnikov-product" => Ok(Self::EpanechnikovProduct),
            other => Err(Error::InvalidArgument(format!("unknown kernel '{other}'"))),
        }
    }
}

/// A kernel density `w` on `R^dim` with bandwidth `λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    dim: usize,
    lambda: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, dim: usize, lambda: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidArgument(format!("kernel dimension must be 2 or 3, got {dim}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("bandwidth must be > 0, got {lambda}")));
        }
        Ok(Self { kind, dim, lambda })
    }

    pub fn gaussian(dim: usize, lambda: f64) -> Result<Self> {
        Self::new(KernelKind::Gaussian, dim, lambda)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The unscaled density `w(x)`.
    pub fn density(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match self.kind {
            KernelKind::Gaussian => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (2.0 * PI).powf(-(self.dim as f64) / 2.0) * (-0.5 * r2).exp()
            }
            KernelKind::EpanechnikovProduct => x
                .iter()
                .map(|v| if v.abs() < 1.0 { 0.75 * (1.0 - v * v) } else { 0.0 })
                .product(),
        }
    }

    /// `w_n(x) = λ^{-dim} w(x / λ)`.
    pub fn weight(&self, x: &[f64]) -> f64 {
        let mut scaled = [0.0; 3];
        for (s, v) in scaled.iter_mut().zip(x) {
            *s = v / self.lambda;
        }
        self.density(&scaled[..self.dim]) / self.lambda.powi(self.dim as i32)
    }

    /// `∫ w²(x) dx` of the unscaled density.
    pub fn square_integral(&self) -> f64 {
        match self.kind {
            KernelKind::Gaussian => (4.0 * PI).powf(-(self.dim as f64) / 2.0),
            KernelKind::EpanechnikovProduct => 0.6f64.powi(self.dim as i32),
        }
    }

    /// Euclidean radius outside which `w_n` is treated as zero.
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            KernelKind::Gaussian => GAUSSIAN_CUTOFF * self.lambda,
            KernelKind::EpanechnikovProduct => self.lambda * (self.dim as f64).sqrt(),
        }
    }
}

/// Uniform bucket grid for fixed-radius neighbour queries.
struct CellGrid<const D: usize> {
    cell: f64,
    buckets: HashMap<[i64; D], Vec<usize>>,
}

impl<const D: usize> CellGrid<D> {
    fn new(points: &[[f64; D]], cell: f64) -> Self {
        let mut buckets: HashMap<[i64; D], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(p, cell)).or_default().push(i);
        }
        Self { cell, buckets }
    }

    fn key(p: &[f64; D], cell: f64) -> [i64; D] {
        let mut k = [0i64; D];
        for d in 0..D {
            k[d] = (p[d] / cell).floor() as i64;
        }
        k
    }

    /// Calls `f` on every indexed point in a cell touching the cube of
    /// half-width `cell` around `target`.
    fn for_near(&self, target: &[f64; D], mut f: impl FnMut(usize)) {
        let mut lo = [0i64; D];
        let mut hi = [0i64; D];
        for d in 0..D {
            lo[d] = ((target[d] - self.cell) / self.cell).floor() as i64;
            hi[d] = ((target[d] + self.cell) / self.cell).floor() as i64;
        }
        let mut key = lo;
        loop {
            if let Some(b) = self.buckets.get(&key) {
                b.iter().for_each(|&i| f(i));
            }
            let mut d = 0;
            loop {
                if d == D {
                    return;
                }
                if key[d] < hi[d] {
                    key[d] += 1;
                    break;
                }
                key[d] = lo[d];
                d += 1;
            }
        }
    }
}

fn require_positive_nu(nu: f64) -> Result<f64> {
    if nu > 0.0 && nu.is_finite() {
        Ok(nu)
    } else {
        Err(Error::InvalidArgument(format!("intensity must be > 0, got {nu}")))
    }
}

/// Kernel estimator of `C(h, u)` from marks at irregular spatial locations
/// observed over `t = 1..n`.
///
/// Sums `w_n(h − (s_j − s_i)) Z(s_i, t) Z(s_j, t + u)` over ordered pairs
/// of distinct locations and `t = 1..n−u`, divided by `ν² n |S_n|`. With
/// `nu = None` the intensity is estimated from the data. Pairs at the same
/// location are excluded unless `include_same_site` is set and `u ≠ 0`.
pub fn kernel_cov_st(
    data: &PointDataset,
    lag: &SpaceTimeLag,
    kernel: &KernelSpec,
    nu: Option<f64>,
    include_same_site: bool,
) -> Result<CovEstimate> {
    if data.mode() != PointMode::SpaceTime {
        return Err(Error::InvalidArgument("kernel_cov_st needs space-time data".into()));
    }
    if kernel.dim() != 2 {
        return Err(Error::InvalidArgument("space-time kernel must be 2-dimensional".into()));
    }
    let n = data.n_times();
    if lag.u < 0 {
        return Err(Error::InvalidLag(format!("kernel estimator needs u >= 0, got {}", lag.u)));
    }
    let u = lag.u as usize;
    if u >= n {
        return Err(Error::InvalidLag(format!("u = {u} but only {n} time points")));
    }

    // distinct locations and a (location, time) -> mark table
    let mut loc_index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut locs: Vec<[f64; 2]> = Vec::new();
    let mut marks: Vec<Vec<Option<f64>>> = Vec::new();
    for p in data.points() {
        let s = p.spatial();
        let id = *loc_index.entry((s[0].to_bits(), s[1].to_bits())).or_insert_with(|| {
            locs.push(s);
            marks.push(vec![None; n]);
            locs.len() - 1
        });
        marks[id][(p.time() - 1) as usize] = Some(p.value);
    }
    if locs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "kernel estimator needs at least 2 distinct locations, got {}",
            locs.len()
        )));
    }
    let nu = match nu {
        Some(v) => require_positive_nu(v)?,
        None => require_positive_nu(estimate_intensity(data))?,
    };

    let keep_diagonal = include_same_site && u != 0;
    let radius = kernel.support_radius();
    let grid = CellGrid::new(&locs, radius);
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for (a, sa) in locs.iter().enumerate() {
        let target = [sa[0] + lag.h[0], sa[1] + lag.h[1]];
        grid.for_near(&target, |b| {
            if a == b && !keep_diagonal {
                return;
            }
            let sb = locs[b];
            let w = kernel.weight(&[target[0] - sb[0], target[1] - sb[1]]);
            if w > 0.0 {
                pairs.push((a, b, w));
            }
        });
    }

    let mut sum = CompensatedSum::new();
    let mut mass = CompensatedSum::new();
    for t in 0..n - u {
        for &(a, b, w) in &pairs {
            if let (Some(za), Some(zb)) = (marks[a][t], marks[b][t + u]) {
                sum.add(w * za * zb);
                mass.add(w);
            }
        }
    }
    let area = data.region().measure();
    Ok(CovEstimate {
        lag: lag.to_string(),
        value: sum.value() / (nu * nu * n as f64 * area),
        pair_count: mass.value(),
        regime: Regime::KernelSpaceTime,
    })
}

/// Kernel estimator of `C(k)` for marks at points of a 3-d region: sums
/// `w_n(k − (x_j − x_i)) Z(x_i) Z(x_j)` over ordered pairs `i ≠ j` and
/// divides by `ν² |D_n|`.
pub fn kernel_cov_r3(
    data: &PointDataset,
    k: [f64; 3],
    kernel: &KernelSpec,
    nu: Option<f64>,
) -> Result<CovEstimate> {
    if data.mode() != PointMode::Full3d {
        return Err(Error::InvalidArgument("kernel_cov_r3 needs 3-d data".into()));
    }
    if kernel.dim() != 3 {
        return Err(Error::InvalidArgument("3-d estimator needs a 3-dimensional kernel".into()));
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidLag(format!("non-finite lag {k:?}")));
    }
    if data.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "kernel estimator needs at least 2 points, got {}",
            data.len()
        )));
    }
    let nu = match nu {
        Some(v) => require_positive_nu(v)?,
        None => require_positive_nu(estimate_intensity(data))?,
    };
    let locs: Vec<[f64; 3]> = data.points().iter().map(|p| p.loc).collect();
    let grid = CellGrid::new(&locs, kernel.support_radius());
    let mut sum = CompensatedSum::new();
    let mut mass = CompensatedSum::new();
    for (i, xi) in locs.iter().enumerate() {
        let zi = data.points()[i].value;
        let target = [xi[0] + k[0], xi[1] + k[1], xi[2] + k[2]];
        grid.for_near(&target, |j| {
            if i == j {
                return;
            }
            let xj = locs[j];
            let w = kernel.weight(&[target[0] - xj[0], target[1] - xj[1], target[2] - xj[2]]);
            if w > 0.0 {
                sum.add(w * zi * data.points()[j].value);
                mass.add(w);
            }
        });
    }
    Ok(CovEstimate {
        lag: format!("k=({},{},{})", k[0], k[1], k[2]),
        value: sum.value() / (nu * nu * data.region().measure()),
        pair_count: mass.value(),
        regime: Regime::Kernel3d,
    })
}

/// `ν̂ = N / |S_n|`. In space-time mode the count is averaged over the time
/// steps, so a fixed set of locations observed at every time gives the
/// number of distinct locations per unit area.
pub fn estimate_intensity(data: &PointDataset) -> f64 {
    let measure = data.region().measure();
    match data.mode() {
        PointMode::Full3d => data.len() as f64 / measure,
        PointMode::SpaceTime => data.len() as f64 / (measure * data.n_times().max(1) as f64),
    }
}

/// `λ = c |S_n|^{-1/6}` for space-time regions, `λ = c |D_n|^{-1/9}` for 3-d
/// regions; both satisfy the bandwidth growth conditions as the region grows.
pub fn default_bandwidth(region: &RegionSpec, c: f64) -> f64 {
    let m = region.measure();
    match region.mode() {
        PointMode::SpaceTime => c * m.powf(-1.0 / 6.0),
        PointMode::Full3d => c * m.powf(-1.0 / 9.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::MarkedPoint;
    use approx::assert_relative_eq;

    fn st_data(points: &[([f64; 2], i64, f64)], side: f64, n: usize) -> PointDataset {
        let pts = points
            .iter()
            .map(|&(s, t, z)| MarkedPoint {
                loc: [s[0], s[1], t as f64],
                value: z,
            })
            .collect();
        PointDataset::new(PointMode::SpaceTime, pts, RegionSpec::square(side, n).unwrap()).unwrap()
    }

    #[test]
    fn square_integral_by_quadrature() {
        // midpoint rule on a fine grid as an independent check
        for kind in [KernelKind::Gaussian, KernelKind::EpanechnikovProduct] {
            let k = KernelSpec::new(kind, 2, 1.0).unwrap();
            let (lo, hi, m) = (-6.0, 6.0, 1200);
            let dx = (hi - lo) / m as f64;
            let mut total = 0.0;
            let mut sq = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let x = [lo + (i as f64 + 0.5) * dx, lo + (j as f64 + 0.5) * dx];
                    let w = k.density(&x);
                    total += w * dx * dx;
                    sq += w * w * dx * dx;
                }
            }
            assert_relative_eq!(total, 1.0, epsilon = 1e-4);
            assert_relative_eq!(sq, k.square_integral(), epsilon = 1e-4);
        }
        let g3 = KernelSpec::gaussian(3, 0.3).unwrap();
        assert_relative_eq!(g3.square_integral(), 1.0 / (8.0 * PI.powf(1.5)), epsilon = 1e-12);
        let g2 = KernelSpec::gaussian(2, 0.3).unwrap();
        assert_relative_eq!(g2.square_integral(), 1.0 / (4.0 * PI), epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_kernels() {
        assert!(KernelSpec::gaussian(2, 0.0).is_err());
        assert!(KernelSpec::gaussian(4, 1.0).is_err());
    }

    #[test]
    fn two_site_hand_evaluation() {
        let lam = 0.7;
        let k = KernelSpec::gaussian(2, lam).unwrap();
        let (za, zb) = (1.3, -0.4);
        let h = [1.0, 0.5];
        let data = st_data(&[([2.0, 2.0], 1, za), ([3.0, 2.5], 1, zb)], 10.0, 1);
        let nu = 0.02;
        let lag = SpaceTimeLag::new(h, 0).unwrap();
        let e = kernel_cov_st(&data, &lag, &k, Some(nu), false).unwrap();
        let wn = |x: f64, y: f64| {
            (-(x * x + y * y) / (2.0 * lam * lam)).exp() / (2.0 * PI * lam * lam)
        };
        // (a, b): h − (b − a) = 0; (b, a): h − (a − b) = 2h
        let expected = (wn(0.0, 0.0) * za * zb + wn(2.0 * h[0], 2.0 * h[1]) * zb * za)
            / (nu * nu * 1.0 * 100.0);
        assert_relative_eq!(e.value, expected, max_relative = 1e-14);
    }

    #[test]
    fn same_site_flag() {
        let k = KernelSpec::gaussian(2, 0.5).unwrap();
        let data = st_data(
            &[([1.0, 1.0], 1, 2.0), ([1.0, 1.0], 2, 3.0), ([6.0, 6.0], 1, 1.0), ([6.0, 6.0], 2, 1.0)],
            8.0,
            2,
        );
        let lag = SpaceTimeLag::new([0.0, 0.0], 1).unwrap();
        let off = kernel_cov_st(&data, &lag, &k, Some(1.0), false).unwrap();
        let on = kernel_cov_st(&data, &lag, &k, Some(1.0), true).unwrap();
        let w0 = k.weight(&[0.0, 0.0]);
        assert!(off.value.abs() < 1e-20);
        assert_relative_eq!(on.value, w0 * (2.0 * 3.0 + 1.0) / (2.0 * 64.0), max_relative = 1e-14);
    }

    #[test]
    fn bilinear_and_zero_marks() {
        let k = KernelSpec::gaussian(3, 0.8).unwrap();
        let region = RegionSpec::cube(4.0).unwrap();
        let pts: Vec<MarkedPoint> = (0..40)
            .map(|i| {
                let f = i as f64;
                MarkedPoint {
                    loc: [(f * 0.37) % 4.0, (f * 0.91) % 4.0, (f * 1.53) % 4.0],
                    value: (f * 0.7).sin(),
                }
            })
            .collect();
        let d = PointDataset::new(PointMode::Full3d, pts, region).unwrap();
        let kk = [0.5, 0.0, -0.25];
        let base = kernel_cov_r3(&d, kk, &k, Some(1.0)).unwrap().value;
        let scaled = kernel_cov_r3(&d.map_values(|v| 3.0 * v), kk, &k, Some(1.0)).unwrap().value;
        assert_relative_eq!(scaled, 9.0 * base, max_relative = 1e-12);
        let zero = kernel_cov_r3(&d.map_values(|_| 0.0), kk, &k, Some(1.0)).unwrap().value;
        assert_eq!(zero, 0.0);
        let neg = kernel_cov_r3(&d, [-kk[0], -kk[1], -kk[2]], &k, Some(1.0)).unwrap().value;
        assert_relative_eq!(neg, base, max_relative = 1e-12);
    }

    #[test]
    fn r3_two_point_hand_value() {
        let lam = 0.5;
        let k = KernelSpec::gaussian(3, lam).unwrap();
        let pts = vec![
            MarkedPoint { loc: [1.0, 1.0, 1.0], value: 2.0 },
            MarkedPoint { loc: [1.3, 0.8, 1.1], value: -1.0 },
        ];
        let d = PointDataset::new(PointMode::Full3d, pts, RegionSpec::cube(2.0).unwrap()).unwrap();
        let kk = [0.2, 0.1, 0.0];
        let wn = |x: [f64; 3]| {
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            (-r2 / (2.0 * lam * lam)).exp() / ((2.0 * PI).powf(1.5) * lam.powi(3))
        };
        let d12 = [0.3, -0.2, 0.1];
        let expected = (wn([kk[0] - d12[0], kk[1] - d12[1], kk[2] - d12[2]])
            + wn([kk[0] + d12[0], kk[1] + d12[1], kk[2] + d12[2]]))
            * (2.0 * -1.0)
            / 8.0;
        let e = kernel_cov_r3(&d, kk, &k, Some(1.0)).unwrap();
        assert_relative_eq!(e.value, expected, max_relative = 1e-14);
    }

    #[test]
    fn intensity_and_bandwidth() {
        let pts: Vec<([f64; 2], i64, f64)> = (0..50).map(|i| ([i as f64 * 0.19, 1.0], 1, 0.0)).collect();
        assert_eq!(estimate_intensity(&st_data(&pts, 10.0, 1)), 0.5);
        assert_eq!(estimate_intensity(&st_data(&[], 10.0, 1)), 0.0);
        assert_relative_eq!(default_bandwidth(&RegionSpec::square(1.0, 1).unwrap(), 1.0), 1.0);
        assert_relative_eq!(default_bandwidth(&RegionSpec::square(8.0, 1).unwrap(), 1.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(default_bandwidth(&RegionSpec::cube(8.0).unwrap(), 2.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn too_few_points() {
        let k = KernelSpec::gaussian(2, 1.0).unwrap();
        let d = st_data(&[([1.0, 1.0], 1, 1.0)], 4.0, 1);
        assert!(matches!(
            kernel_cov_st(&d, &SpaceTimeLag::zero(), &k, Some(1.0), false),
            Err(Error::InsufficientData(_))
        ));
    }
}
