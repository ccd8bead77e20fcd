use super::{Scaling, SigmaMatrix, SigmaMethod};
use crate::datasets::{LagClass, LagSet, LatticeDataset, SpaceTimeLag, StationDataset};
use crate::error::{Error, Result};
use crate::estimators::{moment_cov_lattice, StationEstimator, StationOptions};
use crate::numeric::sample_covariance;

/// Blocks must exceed the largest temporal lag by at least this much.
pub const MIN_BLOCK_MARGIN: usize = 10;
pub const MIN_BLOCKS: usize = 8;

fn check_blocks(n: usize, block_len: usize, max_u: usize) -> Result<usize> {
    if block_len < max_u + MIN_BLOCK_MARGIN {
        return Err(Error::InvalidArgument(format!(
            "block length {block_len} must be at least max lag {max_u} + {MIN_BLOCK_MARGIN}"
        )));
    }
    let n_blocks = n / block_len;
    if n_blocks < MIN_BLOCKS {
        return Err(Error::InsufficientData(format!(
            "{n_blocks} complete blocks of length {block_len}; need {MIN_BLOCKS}"
        )));
    }
    Ok(n_blocks)
}

/// Estimate `Σ = lim |T_n| cov(Ĝ_n)` from non-overlapping time blocks of a
/// station series: `block_len` times the covariance of the per-block `Ĝ`.
pub fn sigma_block_subsample_station(
    data: &StationDataset,
    lags: &LagSet<LagClass>,
    opts: &StationOptions,
    block_len: usize,
) -> Result<SigmaMatrix> {
    let n_blocks = check_blocks(data.n_times(), block_len, lags.max_u().max(0) as usize)?;
    let est = StationEstimator::new(data.sites(), lags, opts)?;
    let mut rows = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let block = data.values().columns(b * block_len, block_len).into_owned();
        rows.push(est.estimate(&block)?);
    }
    let cov = sample_covariance(&rows, (n_blocks - 1) as f64) * block_len as f64;
    Ok(SigmaMatrix::from_raw(
        cov,
        lags.labels(),
        Scaling::TimeLength,
        SigmaMethod::BlockSubsample,
    ))
}

/// Lattice version: blocks are slabs of `block_len` consecutive times and
/// the covariance of the per-block `Ĝ` is scaled by the mean number of
/// lattice points per block.
pub fn sigma_block_subsample_lattice(
    data: &LatticeDataset,
    lags: &LagSet<SpaceTimeLag>,
    block_len: usize,
) -> Result<SigmaMatrix> {
    let (t_lo, t_hi) = data
        .time_range()
        .ok_or_else(|| Error::InsufficientData("empty lattice".into()))?;
    let max_u = lags.iter().map(|l| l.u.unsigned_abs() as usize).max().unwrap_or(0);
    let n = (t_hi - t_lo + 1) as usize;
    let n_blocks = check_blocks(n, block_len, max_u)?;
    let mut rows = Vec::with_capacity(n_blocks);
    let mut points = 0usize;
    for b in 0..n_blocks {
        let lo = t_lo + (b * block_len) as i64;
        let slab = data.time_slab(lo, lo + block_len as i64 - 1);
        points += slab.len();
        let g = lags
            .iter()
            .map(|l| moment_cov_lattice(&slab, l).map(|e| e.value))
            .collect::<Result<Vec<_>>>()?;
        rows.push(g);
    }
    let scale = points as f64 / n_blocks as f64;
    let cov = sample_covariance(&rows, (n_blocks - 1) as f64) * scale;
    Ok(SigmaMatrix::from_raw(
        cov,
        lags.labels(),
        Scaling::LatticeSize,
        SigmaMethod::BlockSubsample,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::unit_grid;
    use nalgebra::DMatrix;

    #[test]
    fn constant_field_gives_zero() {
        let d = StationDataset::from_values(unit_grid(3), DMatrix::from_element(9, 200, 1.5)).unwrap();
        let s = sigma_block_subsample_station(&d, &LagSet::unit_norm_pair(), &StationOptions::default(), 20)
            .unwrap();
        assert_eq!(s.values.amax(), 0.0);
        let l = LatticeDataset::full_box(3, 3, 120, |_| 2.0);
        let lags = LagSet::new(vec![SpaceTimeLag::zero()]).unwrap();
        assert_eq!(sigma_block_subsample_lattice(&l, &lags, 12).unwrap().values.amax(), 0.0);
    }

    #[test]
    fn block_requirements() {
        let d = StationDataset::from_values(unit_grid(2), DMatrix::zeros(4, 100)).unwrap();
        let lags = LagSet::unit_norm_pair();
        let opts = StationOptions::default();
        assert!(matches!(
            sigma_block_subsample_station(&d, &lags, &opts, 20),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            sigma_block_subsample_station(&d, &lags, &opts, 5),
            Err(Error::InvalidArgument(_))
        ));
    }
}
