//! Space-time lags and ordered lag sets.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A lag `(h, u)`: spatial offset `h` and an integer temporal offset `u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceTimeLag {
    pub h: [f64; 2],
    pub u: i64,
}

impl SpaceTimeLag {
    pub fn new(h: [f64; 2], u: i64) -> Result<Self> {
        if !h.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidLag(format!("non-finite spatial lag {h:?}")));
        }
        Ok(Self { h, u })
    }

    pub fn zero() -> Self {
        Self { h: [0.0, 0.0], u: 0 }
    }

    pub fn neg(&self) -> Self {
        Self {
            h: [-self.h[0], -self.h[1]],
            u: -self.u,
        }
    }

    /// Integer spatial components, or an error when `h` is not on the lattice.
    pub fn integer_h(&self) -> Result<[i64; 2]> {
        let mut out = [0i64; 2];
        for (o, &x) in out.iter_mut().zip(&self.h) {
            if x.fract() != 0.0 {
                return Err(Error::InvalidLag(format!(
                    "lattice lag needs integer spatial components, got {:?}",
                    self.h
                )));
            }
            *o = x as i64;
        }
        Ok(out)
    }

    pub fn norm_h(&self) -> f64 {
        self.h[0].hypot(self.h[1])
    }
}

impl fmt::Display for SpaceTimeLag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h=({},{});u={}", self.h[0], self.h[1], self.u)
    }
}

/// A lag in the fixed-station regime: either one exact vector lag, or the
/// isotropic class of all spatial lags with a given Euclidean norm.
///
/// The isotropic class pairs site `k` with site `k'` whenever
/// `‖s_k' − s_k‖ = norm` and the offset lies in the canonical half-plane
/// (`dx > 0`, or `dx = 0` and `dy > 0`). One representative of each `±h`
/// pair is kept, so for `u = 0` no product is counted twice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LagClass {
    Vector(SpaceTimeLag),
    Norm { norm: f64, u: i64 },
}

impl LagClass {
    pub fn u(&self) -> i64 {
        match self {
            LagClass::Vector(l) => l.u,
            LagClass::Norm { u, .. } => *u,
        }
    }

    /// Ordered site pairs `(k, k')` realizing this lag on `sites`.
    pub fn station_pairs(&self, sites: &[[f64; 2]], tol: f64) -> Vec<(usize, usize)> {
        match *self {
            LagClass::Vector(lag) => super::spatial_pairs(sites, lag.h, tol),
            LagClass::Norm { norm, .. } => norm_class_pairs(sites, norm, tol),
        }
    }
}

impl From<SpaceTimeLag> for LagClass {
    fn from(l: SpaceTimeLag) -> Self {
        LagClass::Vector(l)
    }
}

impl fmt::Display for LagClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LagClass::Vector(l) => l.fmt(f),
            LagClass::Norm { norm, u } => write!(f, "|h|={norm};u={u}"),
        }
    }
}

/// Parses `hx,hy,u` as a vector lag and `iso:r,u` as a norm class.
impl FromStr for LagClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidLag(format!("cannot parse lag '{s}'"));
        if let Some(rest) = s.strip_prefix("iso:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(bad());
            }
            let norm: f64 = parts[0].parse().map_err(|_| bad())?;
            let u: i64 = parts[1].parse().map_err(|_| bad())?;
            if !(norm.is_finite() && norm >= 0.0) {
                return Err(bad());
            }
            return Ok(LagClass::Norm { norm, u });
        }
        Ok(LagClass::Vector(s.parse()?))
    }
}

impl FromStr for SpaceTimeLag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidLag(format!("cannot parse lag '{s}'"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let hx: f64 = parts[0].parse().map_err(|_| bad())?;
        let hy: f64 = parts[1].parse().map_err(|_| bad())?;
        let u: i64 = parts[2].parse().map_err(|_| bad())?;
        SpaceTimeLag::new([hx, hy], u)
    }
}

fn norm_class_pairs(sites: &[[f64; 2]], norm: f64, tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (k, a) in sites.iter().enumerate() {
        for (k2, b) in sites.iter().enumerate() {
            let dx = b[0] - a[0];
            let dy = b[1] - a[1];
            if (dx.hypot(dy) - norm).abs() > tol {
                continue;
            }
            let canonical = if norm <= tol {
                k == k2
            } else {
                dx > tol || (dx.abs() <= tol && dy > tol)
            };
            if canonical {
                out.push((k, k2));
            }
        }
    }
    out
}

/// Ordered, duplicate-free list of lags. The order fixes the coordinates of
/// the estimate vector and the rows/columns of every Σ matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LagSet<L = SpaceTimeLag> {
    lags: Vec<L>,
}

impl<L: PartialEq + fmt::Display> LagSet<L> {
    pub fn new(lags: Vec<L>) -> Result<Self> {
        if lags.is_empty() {
            return Err(Error::InvalidLag("lag set must not be empty".into()));
        }
        for (i, a) in lags.iter().enumerate() {
            if lags[..i].contains(a) {
                return Err(Error::InvalidLag(format!("duplicate lag {a}")));
            }
        }
        Ok(Self { lags })
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, L> {
        self.lags.iter()
    }

    pub fn as_slice(&self) -> &[L] {
        &self.lags
    }

    pub fn labels(&self) -> Vec<String> {
        self.lags.iter().map(ToString::to_string).collect()
    }
}

impl<L> std::ops::Index<usize> for LagSet<L> {
    type Output = L;
    fn index(&self, i: usize) -> &L {
        &self.lags[i]
    }
}

impl LagSet<LagClass> {
    /// The two lags of the VAR(1) experiment: `‖h‖ = 1` at `u = 0` and `u = 1`.
    pub fn unit_norm_pair() -> Self {
        Self {
            lags: vec![
                LagClass::Norm { norm: 1.0, u: 0 },
                LagClass::Norm { norm: 1.0, u: 1 },
            ],
        }
    }

    pub fn max_u(&self) -> i64 {
        self.lags.iter().map(|l| l.u()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(side: usize) -> Vec<[f64; 2]> {
        let mut v = Vec::new();
        for y in 0..side {
            for x in 0..side {
                v.push([x as f64, y as f64]);
            }
        }
        v
    }

    #[test]
    fn unit_norm_class_on_3x3_has_12_pairs() {
        let pairs = LagClass::Norm { norm: 1.0, u: 0 }.station_pairs(&grid(3), 1e-9);
        assert_eq!(pairs.len(), 12);
        // no (k, k') together with (k', k)
        for &(a, b) in &pairs {
            assert!(!pairs.contains(&(b, a)));
        }
    }

    #[test]
    fn zero_norm_class_is_identity() {
        let pairs = LagClass::Norm { norm: 0.0, u: 0 }.station_pairs(&grid(3), 1e-9);
        assert_eq!(pairs, (0..9).map(|k| (k, k)).collect::<Vec<_>>());
    }

    #[test]
    fn lag_set_rejects_duplicates_and_empty() {
        let l = SpaceTimeLag::new([1.0, 0.0], 0).unwrap();
        assert!(LagSet::new(vec![l, l]).is_err());
        assert!(LagSet::<SpaceTimeLag>::new(vec![]).is_err());
        assert_eq!(LagSet::new(vec![l, l.neg()]).unwrap().len(), 2);
    }

    #[test]
    fn parse_lags() {
        assert_eq!(
            "1,0,2".parse::<LagClass>().unwrap(),
            LagClass::Vector(SpaceTimeLag { h: [1.0, 0.0], u: 2 })
        );
        assert_eq!(
            "iso:1,1".parse::<LagClass>().unwrap(),
            LagClass::Norm { norm: 1.0, u: 1 }
        );
        assert!("1,0".parse::<LagClass>().is_err());
        assert!(SpaceTimeLag::new([f64::NAN, 0.0], 0).is_err());
    }

    #[test]
    fn integer_h_rejects_fractions() {
        assert!(SpaceTimeLag::new([0.5, 0.0], 0).unwrap().integer_h().is_err());
        assert_eq!(
            SpaceTimeLag::new([-2.0, 3.0], 1).unwrap().integer_h().unwrap(),
            [-2, 3]
        );
    }
}
