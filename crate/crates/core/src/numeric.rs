//! Small numerical helpers shared across modules.

use nalgebra::{DMatrix, Schur};

const SCHUR_MAX_ITER: usize = 10_000;

/// Neumaier compensated accumulator.
///
/// Kernel double sums and plug-in sums use this so that the result does not
/// depend on the order in which terms arrive (to about 1e-15 relative).
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Largest absolute eigenvalue modulus of a square matrix.
///
/// Uses a Schur decomposition with a bounded iteration count; if that does
/// not converge, falls back to Gelfand's formula `ρ = lim ‖A^k‖^{1/k}`
/// evaluated by repeated squaring with rescaling.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.amax() == 0.0 {
        return 0.0;
    }
    if let Some(schur) = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
        return schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
    }
    let mut a = m.clone();
    let mut log_scale = 0.0;
    let mut k = 1.0;
    for _ in 0..40 {
        let s = a.norm();
        if s == 0.0 {
            return 0.0;
        }
        a /= s;
        log_scale += s.ln() / k;
        a = &a * &a;
        k *= 2.0;
    }
    (log_scale + a.norm().ln() / k).exp()
}

/// Replace `m` by `(m + mᵀ)/2` and return the largest absolute asymmetry seen.
pub fn symmetrize(m: &mut DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let a = m[(i, j)];
            let b = m[(j, i)];
            worst = worst.max((a - b).abs());
            let avg = 0.5 * (a + b);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    worst
}

/// Format with six significant digits. Used for bit-stable CSV output.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..=9).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // -0.000000 style outputs collapse to 0
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

/// Sample covariance of the rows of `rows` (each row one observation).
///
/// Rows are shifted by the first row before averaging, so identical rows
/// give an exactly zero matrix.
pub fn sample_covariance(rows: &[Vec<f64>], divisor: f64) -> DMatrix<f64> {
    let m = rows.first().map_or(0, Vec::len);
    let n = rows.len() as f64;
    let origin = rows.first().cloned().unwrap_or_default();
    let shifted: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(&origin).map(|(x, o)| x - o).collect())
        .collect();
    let rows = &shifted;
    let mut mean = vec![0.0; m];
    for r in rows {
        for (acc, x) in mean.iter_mut().zip(r) {
            *acc += x;
        }
    }
    for v in &mut mean {
        *v /= n;
    }
    let mut cov = DMatrix::zeros(m, m);
    for r in rows {
        for a in 0..m {
            let da = r[a] - mean[a];
            for b in a..m {
                cov[(a, b)] += da * (r[b] - mean[b]);
            }
        }
    }
    for a in 0..m {
        for b in a..m {
            let v = cov[(a, b)] / divisor;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let terms = [1e16, 1.0, -1e16, 1.0];
        let naive: f64 = terms.iter().sum();
        let comp: CompensatedSum = terms.iter().copied().collect();
        assert_eq!(comp.value(), 2.0);
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn sig6_formats() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(0.6534410551), "0.653441");
        assert_eq!(sig6(8.0), "8.00000");
        assert_eq!(sig6(1234.5678), "1234.57");
        assert_eq!(sig6(1.5e-7), "1.50000e-7");
    }

    #[test]
    fn spectral_radius_of_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.3, -0.7, 0.1]));
        assert!((spectral_radius(&m) - 0.7).abs() < 1e-12);
        assert_eq!(spectral_radius(&DMatrix::zeros(4, 4)), 0.0);
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        assert!((spectral_radius(&rot) - 0.5).abs() < 1e-12);
    }
}
