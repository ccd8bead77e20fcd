use nalgebra::DMatrix;

use super::{Scaling, SigmaMatrix, SigmaMethod};
use crate::datasets::{LagSet, LatticeDataset, SpaceTimeLag};
use crate::error::{Error, Result};

/// Offsets `|d₁|, |d₂| ≤ spatial`, `|d_t| ≤ temporal` kept in the plug-in sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PluginWindow {
    pub spatial: usize,
    pub temporal: usize,
}

impl Default for PluginWindow {
    fn default() -> Self {
        Self {
            spatial: 5,
            temporal: 5,
        }
    }
}

/// Each retained autocovariance term must be averaged over at least this
/// many products.
pub const MIN_TERM_PAIRS: usize = 30;

/// Share of the diagonal carried by the outermost shell of offsets above
/// which a truncation warning is printed.
const BOUNDARY_WARN: f64 = 0.05;

struct DenseBox {
    lo: [i64; 3],
    ext: [usize; 3],
}

impl DenseBox {
    fn len(&self) -> usize {
        self.ext.iter().product()
    }

    fn linear(&self, c: [usize; 3]) -> usize {
        c[0] + self.ext[0] * (c[1] + self.ext[1] * c[2])
    }

    fn coords(&self, p: &[i64; 3]) -> [usize; 3] {
        [
            (p[0] - self.lo[0]) as usize,
            (p[1] - self.lo[1]) as usize,
            (p[2] - self.lo[2]) as usize,
        ]
    }
}

/// Plug-in estimate of `Σ = lim |D_n| cov(Ĝ_n)` on a lattice: entry `(i, j)`
/// sums the empirical cross-covariances of the product fields
/// `Y_i(x) = Z(x) Z(x + k_i)` over the offsets in `window`.
pub fn sigma_lattice_plugin(
    data: &LatticeDataset,
    lags: &LagSet<SpaceTimeLag>,
    window: PluginWindow,
) -> Result<SigmaMatrix> {
    if data.is_empty() {
        return Err(Error::InsufficientData("empty lattice".into()));
    }
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for p in data.points() {
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let bx = DenseBox {
        lo,
        ext: [
            (hi[0] - lo[0] + 1) as usize,
            (hi[1] - lo[1] + 1) as usize,
            (hi[2] - lo[2] + 1) as usize,
        ],
    };
    if window.spatial >= bx.ext[0] || window.spatial >= bx.ext[1] || window.temporal >= bx.ext[2] {
        return Err(Error::InvalidArgument(format!(
            "window {:?} exceeds the lattice extent {:?}",
            window, bx.ext
        )));
    }

    let mut z = vec![f64::NAN; bx.len()];
    for (p, &v) in data.points().iter().zip(data.values()) {
        z[bx.linear(bx.coords(p))] = v;
    }

    // product fields on the dense box, NaN where undefined
    let mut fields = Vec::with_capacity(lags.len());
    for lag in lags.iter() {
        let h = lag.integer_h()?;
        let k = [h[0], h[1], lag.u];
        let mut y = vec![f64::NAN; bx.len()];
        for (p, &v) in data.points().iter().zip(data.values()) {
            let q = [p[0] + k[0], p[1] + k[1], p[2] + k[2]];
            if (0..3).all(|d| q[d] >= bx.lo[d] && q[d] < bx.lo[d] + bx.ext[d] as i64) {
                let w = z[bx.linear(bx.coords(&q))];
                if !w.is_nan() {
                    y[bx.linear(bx.coords(p))] = v * w;
                }
            }
        }
        let (sum, count) = y
            .iter()
            .filter(|v| !v.is_nan())
            .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        if count == 0 {
            return Err(Error::EmptyPairSet(lag.to_string()));
        }
        let mean = sum / count as f64;
        for v in y.iter_mut() {
            *v -= mean;
        }
        fields.push(y);
    }

    let m = lags.len();
    let ws = window.spatial as i64;
    let wt = window.temporal as i64;
    let mut values = DMatrix::zeros(m, m);
    let mut boundary = DMatrix::zeros(m, m);
    for dt in -wt..=wt {
        for dy in -ws..=ws {
            for dx in -ws..=ws {
                let d = [dx, dy, dt];
                let on_edge = (ws > 0 && (dx.abs() == ws || dy.abs() == ws)) || (wt > 0 && dt.abs() == wt);
                let gamma = offset_cov(&bx, &fields, d)?;
                values += &gamma;
                if on_edge {
                    boundary += &gamma;
                }
            }
        }
    }
    let share = (0..m)
        .map(|i| boundary[(i, i)].abs() / values[(i, i)].abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    if share > BOUNDARY_WARN {
        eprintln!(
            "warning: outermost window shell carries {:.1}% of a diagonal entry; consider a wider window",
            100.0 * share
        );
    }
    Ok(SigmaMatrix::from_raw(
        values,
        lags.labels(),
        Scaling::LatticeSize,
        SigmaMethod::PluginTruncated,
    ))
}

/// Empirical `cov{Y_i(x), Y_j(x + d)}` for all `(i, j)`.
fn offset_cov(bx: &DenseBox, fields: &[Vec<f64>], d: [i64; 3]) -> Result<DMatrix<f64>> {
    let m = fields.len();
    let mut sums = DMatrix::zeros(m, m);
    let mut counts = vec![0usize; m * m];
    let range = |dd: i64, ext: usize| -> (usize, usize) {
        if dd >= 0 {
            (0, ext.saturating_sub(dd as usize))
        } else {
            ((-dd) as usize, ext)
        }
    };
    let (x0, x1) = range(d[0], bx.ext[0]);
    let (y0, y1) = range(d[1], bx.ext[1]);
    let (t0, t1) = range(d[2], bx.ext[2]);
    let shift = d[0] + bx.ext[0] as i64 * (d[1] + bx.ext[1] as i64 * d[2]);
    for t in t0..t1 {
        for y in y0..y1 {
            let row = bx.linear([0, y, t]);
            for x in x0..x1 {
                let a = row + x;
                let b = (a as i64 + shift) as usize;
                for i in 0..m {
                    let yi = fields[i][a];
                    if yi.is_nan() {
                        continue;
                    }
                    for j in 0..m {
                        let yj = fields[j][b];
                        if !yj.is_nan() {
                            sums[(i, j)] += yi * yj;
                            counts[i * m + j] += 1;
                        }
                    }
                }
            }
        }
    }
    for i in 0..m {
        for j in 0..m {
            let c = counts[i * m + j];
            if c < MIN_TERM_PAIRS {
                return Err(Error::InsufficientData(format!(
                    "offset {d:?} has only {c} products for lags {i},{j}"
                )));
            }
            sums[(i, j)] /= c as f64;
        }
    }
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_window_is_product_variance() {
        let d = LatticeDataset::full_box(8, 8, 4, |p| ((p[0] * 5 + p[1] * 3 + p[2] * 7) % 9) as f64 - 4.0);
        let lags = LagSet::new(vec![SpaceTimeLag::zero()]).unwrap();
        let s = sigma_lattice_plugin(&d, &lags, PluginWindow { spatial: 0, temporal: 0 }).unwrap();
        let y: Vec<f64> = d.values().iter().map(|v| v * v).collect();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64;
        assert!((s.get(0, 0) - var).abs() < 1e-10);
    }

    #[test]
    fn window_too_large() {
        let d = LatticeDataset::full_box(4, 4, 4, |_| 1.0);
        let lags = LagSet::new(vec![SpaceTimeLag::zero()]).unwrap();
        assert!(sigma_lattice_plugin(&d, &lags, PluginWindow { spatial: 4, temporal: 1 }).is_err());
        // 4x4x4 with a 3-wide spatial offset leaves too few products
        assert!(matches!(
            sigma_lattice_plugin(&d, &lags, PluginWindow { spatial: 3, temporal: 3 }),
            Err(Error::InsufficientData(_))
        ));
    }
}
