use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::datasets::RegionSpec;
use crate::error::{Error, Result};

/// Homogeneous Poisson pattern with intensity `nu` on the box `region`.
///
/// The count is drawn from `Poisson(nu · |region|)` and the points are i.i.d.
/// uniform on the box. Each location has `region.dim()` coordinates.
pub fn sample_poisson_with<R: Rng + ?Sized>(
    region: &RegionSpec,
    nu: f64,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::InvalidArgument(format!("intensity must be >= 0, got {nu}")));
    }
    let mean = nu * region.measure();
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean)
        .map_err(|e| Error::InvalidArgument(format!("Poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    let (lo, hi) = (region.lower(), region.upper());
    Ok((0..count)
        .map(|_| {
            lo.iter()
                .zip(hi)
                .map(|(a, b)| a + (b - a) * rng.random::<f64>())
                .collect()
        })
        .collect())
}

pub fn sample_poisson(region: &RegionSpec, nu: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_poisson_with(region, nu, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_intensity_is_empty() {
        let r = RegionSpec::square(10.0, 1).unwrap();
        assert!(sample_poisson(&r, 0.0, 3).unwrap().is_empty());
        assert!(sample_poisson(&r, -1.0, 3).is_err());
    }

    #[test]
    fn points_inside_and_deterministic() {
        let r = RegionSpec::new(vec![1.0, -2.0, 0.0], vec![3.0, 2.0, 0.5], None).unwrap();
        let a = sample_poisson(&r, 10.0, 11).unwrap();
        assert_eq!(a, sample_poisson(&r, 10.0, 11).unwrap());
        assert!(!a.is_empty());
        assert!(a.iter().all(|p| p.len() == 3 && r.contains(p)));
    }
}
