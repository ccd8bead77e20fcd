//! Data containers for the three sampling regimes, pair enumeration, and
//! CSV ingestion.
//!
//! * [`StationDataset`]: a fixed set of spatial sites observed at times `1..=n`.
//! * [`LatticeDataset`]: values on a finite subset of `Z² × Z`.
//! * [`PointDataset`]: marks at irregular locations, either `(s, t)` with
//!   `s ∈ R²` and integer `t`, or `x ∈ R³`, inside an axis-aligned box.

mod io;
mod lags;

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub use io::{
    load_lattice_csv, load_point_csv, load_station_csv, save_lattice_csv, save_point_csv,
    save_station_csv,
};
pub use lags::{LagClass, LagSet, SpaceTimeLag};

/// Default tolerance (coordinate units) for deciding whether `s + h` is a site.
pub const DEFAULT_SITE_TOL: f64 = 1e-9;

/// Values on a fixed set of sites at integer times `1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct StationDataset {
    site_ids: Vec<String>,
    sites: Vec<[f64; 2]>,
    /// `sites × n`; column `t - 1` holds time `t`.
    values: DMatrix<f64>,
}

impl StationDataset {
    pub fn new(site_ids: Vec<String>, sites: Vec<[f64; 2]>, values: DMatrix<f64>) -> Result<Self> {
        if site_ids.len() != sites.len() || values.nrows() != sites.len() {
            return Err(Error::InvalidArgument(format!(
                "{} ids, {} sites, {} value rows",
                site_ids.len(),
                sites.len(),
                values.nrows()
            )));
        }
        for (i, id) in site_ids.iter().enumerate() {
            if site_ids[..i].contains(id) {
                return Err(Error::InvalidArgument(format!("site '{id}' appears twice")));
            }
        }
        for (i, s) in sites.iter().enumerate() {
            if !s.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite {
                    value: if s[0].is_finite() { s[1] } else { s[0] },
                    at: format!("coordinates of site {}", site_ids[i]),
                });
            }
        }
        if let Some((idx, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let (r, c) = (idx % values.nrows(), idx / values.nrows());
            return Err(Error::NonFinite {
                value: *v,
                at: format!("site {} time {}", site_ids[r], c + 1),
            });
        }
        Ok(Self {
            site_ids,
            sites,
            values,
        })
    }

    /// Sites get ids `"1"`, `"2"`, ... in order.
    pub fn from_values(sites: Vec<[f64; 2]>, values: DMatrix<f64>) -> Result<Self> {
        let ids = (1..=sites.len()).map(|i| i.to_string()).collect();
        Self::new(ids, sites, values)
    }

    pub fn sites(&self) -> &[[f64; 2]] {
        &self.sites
    }

    pub fn site_ids(&self) -> &[String] {
        &self.site_ids
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Number of time points `n = |T_n|`.
    pub fn n_times(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Value at site index `k` and 1-based time `t`.
    pub fn value(&self, k: usize, t: usize) -> f64 {
        self.values[(k, t - 1)]
    }

    pub fn mean(&self) -> f64 {
        self.values.mean()
    }

    /// Sub-dataset of times `start..start + len` (1-based start), re-indexed to `1..=len`.
    pub fn time_window(&self, start: usize, len: usize) -> Result<Self> {
        if start == 0 || start - 1 + len > self.n_times() {
            return Err(Error::InvalidArgument(format!(
                "time window {start}..{} outside 1..={}",
                start + len,
                self.n_times()
            )));
        }
        Ok(Self {
            site_ids: self.site_ids.clone(),
            sites: self.sites.clone(),
            values: self.values.columns(start - 1, len).into_owned(),
        })
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            site_ids: self.site_ids.clone(),
            sites: self.sites.clone(),
            values: self.values.map(f),
        }
    }
}

/// A lattice point `(s₁, s₂, t)`.
pub type LatticePoint = [i64; 3];

/// Values on a finite set of lattice points in `Z² × Z`.
#[derive(Clone, Debug)]
pub struct LatticeDataset {
    points: Vec<LatticePoint>,
    values: Vec<f64>,
    index: HashMap<LatticePoint, usize>,
}

impl PartialEq for LatticeDataset {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.values == other.values
    }
}

impl LatticeDataset {
    pub fn new(points: Vec<LatticePoint>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        let mut index = HashMap::with_capacity(points.len());
        for (i, (p, v)) in points.iter().zip(&values).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: *v,
                    at: format!("lattice point {p:?}"),
                });
            }
            if index.insert(*p, i).is_some() {
                return Err(Error::DuplicateLocation(p.iter().map(|&x| x as f64).collect()));
            }
        }
        Ok(Self {
            points,
            values,
            index,
        })
    }

    /// Full box `[0, nx) × [0, ny) × [1, nt]`, filled in x-fastest order.
    pub fn full_box(nx: usize, ny: usize, nt: usize, f: impl Fn(LatticePoint) -> f64) -> Self {
        let mut points = Vec::with_capacity(nx * ny * nt);
        for t in 1..=nt as i64 {
            for y in 0..ny as i64 {
                for x in 0..nx as i64 {
                    points.push([x, y, t]);
                }
            }
        }
        let values = points.iter().map(|&p| f(p)).collect();
        Self::new(points, values).expect("box points are distinct")
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, p: &LatticePoint) -> Option<f64> {
        self.index.get(p).map(|&i| self.values[i])
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            points: self.points.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            index: self.index.clone(),
        }
    }

    /// Points with `t` in `t_lo..=t_hi`.
    pub fn time_slab(&self, t_lo: i64, t_hi: i64) -> Self {
        let (points, values): (Vec<_>, Vec<_>) = self
            .points
            .iter()
            .zip(&self.values)
            .filter(|(p, _)| (t_lo..=t_hi).contains(&p[2]))
            .map(|(p, v)| (*p, *v))
            .unzip();
        Self::new(points, values).expect("subset of a valid dataset")
    }

    pub fn time_range(&self) -> Option<(i64, i64)> {
        let lo = self.points.iter().map(|p| p[2]).min()?;
        let hi = self.points.iter().map(|p| p[2]).max()?;
        Some((lo, hi))
    }
}

/// Location layout of a [`PointDataset`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointMode {
    /// `s ∈ R²` with integer time `t ∈ 1..=n`.
    SpaceTime,
    /// `x ∈ R³`.
    Full3d,
}

impl PointMode {
    pub fn dim(&self) -> usize {
        match self {
            PointMode::SpaceTime => 2,
            PointMode::Full3d => 3,
        }
    }
}

/// Axis-aligned observation box. In space-time mode the corners are 2-d and
/// `n_time` carries `|T_n|`; in full-3d mode the corners are 3-d.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    n_time: Option<usize>,
}

impl RegionSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, n_time: Option<usize>) -> Result<Self> {
        if lower.len() != upper.len() || !(2..=3).contains(&lower.len()) {
            return Err(Error::InvalidRegion(format!(
                "corners must both be 2-d or 3-d, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.len() == 3 && n_time.is_some() {
            return Err(Error::InvalidRegion("n_time is only used with 2-d boxes".into()));
        }
        if n_time == Some(0) {
            return Err(Error::InvalidRegion("n_time must be at least 1".into()));
        }
        for (a, b) in lower.iter().zip(&upper) {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::InvalidRegion(format!("degenerate side [{a}, {b}]")));
            }
        }
        Ok(Self {
            lower,
            upper,
            n_time,
        })
    }

    /// `[0, side]²` observed at times `1..=n_time`.
    pub fn square(side: f64, n_time: usize) -> Result<Self> {
        Self::new(vec![0.0, 0.0], vec![side, side], Some(n_time))
    }

    /// `[0, side]³`.
    pub fn cube(side: f64) -> Result<Self> {
        Self::new(vec![0.0; 3], vec![side; 3], None)
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn n_time(&self) -> Option<usize> {
        self.n_time
    }

    pub fn mode(&self) -> PointMode {
        if self.dim() == 2 {
            PointMode::SpaceTime
        } else {
            PointMode::Full3d
        }
    }

    /// Lebesgue measure of the box (area for 2-d, volume for 3-d).
    pub fn measure(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| b - a)
            .product()
    }

    /// Closed-box membership test on the spatial (or full 3-d) coordinates.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() >= self.dim()
            && self
                .lower
                .iter()
                .zip(&self.upper)
                .zip(x)
                .all(|((a, b), v)| *a <= *v && *v <= *b)
    }
}

/// One observation at an irregular location. In space-time mode `loc[2]` is
/// the integer time stored as `f64`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkedPoint {
    pub loc: [f64; 3],
    pub value: f64,
}

impl MarkedPoint {
    pub fn spatial(&self) -> [f64; 2] {
        [self.loc[0], self.loc[1]]
    }

    pub fn time(&self) -> i64 {
        self.loc[2] as i64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointDataset {
    mode: PointMode,
    points: Vec<MarkedPoint>,
    region: RegionSpec,
}

impl PointDataset {
    pub fn new(mode: PointMode, points: Vec<MarkedPoint>, region: RegionSpec) -> Result<Self> {
        if region.mode() != mode {
            return Err(Error::InvalidRegion(format!(
                "{mode:?} data needs a {}-d region",
                mode.dim()
            )));
        }
        for p in &points {
            if !p.value.is_finite() {
                return Err(Error::NonFinite {
                    value: p.value,
                    at: format!("point {:?}", p.loc),
                });
            }
            if !region.contains(&p.loc) {
                return Err(Error::OutsideRegion {
                    point: p.loc.to_vec(),
                });
            }
            if mode == PointMode::SpaceTime {
                let n = region.n_time.unwrap_or(0) as f64;
                let t = p.loc[2];
                if t.fract() != 0.0 || t < 1.0 || t > n {
                    return Err(Error::OutsideRegion {
                        point: p.loc.to_vec(),
                    });
                }
            }
        }
        Ok(Self {
            mode,
            points,
            region,
        })
    }

    pub fn mode(&self) -> PointMode {
        self.mode
    }

    pub fn points(&self) -> &[MarkedPoint] {
        &self.points
    }

    pub fn region(&self) -> &RegionSpec {
        &self.region
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of time steps `|T_n|` (space-time mode).
    pub fn n_times(&self) -> usize {
        self.region.n_time.unwrap_or(0)
    }

    /// Number of distinct spatial locations. In space-time mode a location
    /// observed at several times counts once.
    pub fn n_locations(&self) -> usize {
        match self.mode {
            PointMode::Full3d => self.points.len(),
            PointMode::SpaceTime => {
                let mut seen: Vec<(u64, u64)> = self
                    .points
                    .iter()
                    .map(|p| (p.loc[0].to_bits(), p.loc[1].to_bits()))
                    .collect();
                seen.sort_unstable();
                seen.dedup();
                seen.len()
            }
        }
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            mode: self.mode,
            points: self
                .points
                .iter()
                .map(|p| MarkedPoint {
                    loc: p.loc,
                    value: f(p.value),
                })
                .collect(),
            region: self.region.clone(),
        }
    }
}

/// Ordered site pairs `(k, k')` with `‖(s_k + h) − s_k'‖ ≤ tol`.
///
/// The first elements enumerate `S(h)`; the list length is `|S(h)|` when
/// sites are at least `2·tol` apart.
pub fn spatial_pairs(sites: &[[f64; 2]], h: [f64; 2], tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (k, a) in sites.iter().enumerate() {
        let target = [a[0] + h[0], a[1] + h[1]];
        for (k2, b) in sites.iter().enumerate() {
            if (target[0] - b[0]).hypot(target[1] - b[1]) <= tol {
                out.push((k, k2));
            }
        }
    }
    out
}

/// All index pairs `(i, j)` with `points[j] = points[i] + lag`. The length is
/// `|D_n(h, u)|`.
pub fn lattice_pair_set(data: &LatticeDataset, lag: &SpaceTimeLag) -> Result<Vec<(usize, usize)>> {
    let [hx, hy] = lag.integer_h()?;
    let mut out = Vec::new();
    for (i, p) in data.points.iter().enumerate() {
        let q = [p[0] + hx, p[1] + hy, p[2] + lag.u];
        if let Some(j) = data.index_of(&q) {
            out.push((i, j));
        }
    }
    Ok(out)
}

/// Unit-spaced `side × side` grid, x varying fastest.
pub fn unit_grid(side: usize) -> Vec<[f64; 2]> {
    let mut v = Vec::with_capacity(side * side);
    for y in 0..side {
        for x in 0..side {
            v.push([x as f64, y as f64]);
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_pairs(sites: &[[f64; 2]], h: [f64; 2]) -> usize {
        let mut count = 0;
        for a in sites {
            for b in sites {
                if b[0] - a[0] == h[0] && b[1] - a[1] == h[1] {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn spatial_pairs_on_3x3() {
        let g = unit_grid(3);
        assert_eq!(brute_pairs(&g, [1.0, 0.0]), 6);
        assert_eq!(spatial_pairs(&g, [1.0, 0.0], 1e-9).len(), 6);
        assert_eq!(spatial_pairs(&g, [0.0, 0.0], 1e-9).len(), 9);
        assert!(spatial_pairs(&g, [5.0, 5.0], 1e-9).is_empty());
    }

    #[test]
    fn lattice_pairs_on_cube() {
        let data = LatticeDataset::full_box(2, 2, 2, |_| 1.0);
        let lag = SpaceTimeLag::new([1.0, 0.0], 0).unwrap();
        assert_eq!(lattice_pair_set(&data, &lag).unwrap().len(), 4);
        assert_eq!(lattice_pair_set(&data, &SpaceTimeLag::zero()).unwrap().len(), 8);
        let far = SpaceTimeLag::new([0.0, 0.0], 2).unwrap();
        assert!(lattice_pair_set(&data, &far).unwrap().is_empty());
        let frac = SpaceTimeLag::new([0.5, 0.0], 0).unwrap();
        assert!(lattice_pair_set(&data, &frac).is_err());
    }

    #[test]
    fn region_measure_and_contains() {
        let r = RegionSpec::new(vec![0.0, 1.0], vec![2.0, 4.0], Some(5)).unwrap();
        assert_eq!(r.measure(), 6.0);
        assert!(r.contains(&[0.0, 1.0]));
        assert!(r.contains(&[2.0, 4.0]));
        assert!(!r.contains(&[2.1, 4.0]));
        assert!(RegionSpec::new(vec![0.0, 0.0], vec![0.0, 1.0], None).is_err());
        assert_eq!(RegionSpec::cube(8.0).unwrap().measure(), 512.0);
    }

    #[test]
    fn point_dataset_validates_times() {
        let r = RegionSpec::square(1.0, 3).unwrap();
        let p = |t: f64| MarkedPoint {
            loc: [0.5, 0.5, t],
            value: 1.0,
        };
        assert!(PointDataset::new(PointMode::SpaceTime, vec![p(1.0), p(3.0)], r.clone()).is_ok());
        assert!(PointDataset::new(PointMode::SpaceTime, vec![p(0.0)], r.clone()).is_err());
        assert!(PointDataset::new(PointMode::SpaceTime, vec![p(1.5)], r.clone()).is_err());
        assert!(PointDataset::new(PointMode::Full3d, vec![], r).is_err());
    }

    #[test]
    fn station_dataset_rejects_nan() {
        let v = DMatrix::from_row_slice(1, 2, &[1.0, f64::NAN]);
        assert!(StationDataset::from_values(vec![[0.0, 0.0]], v).is_err());
    }
}
