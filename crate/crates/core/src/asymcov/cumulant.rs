/// Fourth-order cumulant
/// `Q(x₁, x₂, x₃) = E{Z(0)Z(x₁)Z(x₂)Z(x₃)} − C(x₁)C(x₃−x₂) − C(x₂)C(x₃−x₁) − C(x₃)C(x₂−x₁)`
/// for a stationary field given its fourth-moment and covariance functions.
pub fn q_cumulant<E, C>(fourth_moment: E, cov: C, x1: &[f64], x2: &[f64], x3: &[f64]) -> f64
where
    E: Fn(&[f64], &[f64], &[f64]) -> f64,
    C: Fn(&[f64]) -> f64,
{
    fourth_moment(x1, x2, x3) - pairing_sum(&cov, x1, x2, x3)
}

/// Fourth moment of a zero-mean Gaussian field with covariance `cov`.
pub fn isserlis_fourth_moment<C>(cov: C) -> impl Fn(&[f64], &[f64], &[f64]) -> f64
where
    C: Fn(&[f64]) -> f64,
{
    move |x1, x2, x3| pairing_sum(&cov, x1, x2, x3)
}

fn pairing_sum<C: Fn(&[f64]) -> f64>(cov: &C, x1: &[f64], x2: &[f64], x3: &[f64]) -> f64 {
    let diff = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p - q).collect() };
    cov(x1) * cov(&diff(x3, x2)) + cov(x2) * cov(&diff(x3, x1)) + cov(x3) * cov(&diff(x2, x1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_oracle_gives_zero_and_origin_identity() {
        let cov = |x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>().sqrt()).exp();
        let e4 = isserlis_fourth_moment(cov);
        let pts = [[0.3, -1.0], [2.0, 0.5], [-0.7, 0.1]];
        assert_eq!(q_cumulant(&e4, cov, &pts[0], &pts[1], &pts[2]), 0.0);
        let o = [0.0, 0.0];
        let kurt = |_: &[f64], _: &[f64], _: &[f64]| 5.0;
        assert_eq!(q_cumulant(kurt, cov, &o, &o, &o), 5.0 - 3.0);
    }
}
