//! Kernel covariance estimator for marks at Poisson sites observed over time,
//! averaged over independent site patterns and field draws.

use stcov::datasets::{RegionSpec, SpaceTimeLag};
use stcov::estimators::{default_bandwidth, estimate_intensity, kernel_cov_st, KernelSpec};
use stcov::simulate::{sample_poisson, simulate_st_field, GaussianFieldSpec};

fn main() -> stcov::Result<()> {
    let region = RegionSpec::square(20.0, 30)?;
    let field = GaussianFieldSpec::exponential(1.0, 2.0, 3.0)?;
    let kernel = KernelSpec::gaussian(2, default_bandwidth(&region, 1.0))?;
    let lags = [
        SpaceTimeLag::new([1.0, 0.0], 0)?,
        SpaceTimeLag::new([1.0, 0.0], 1)?,
        SpaceTimeLag::new([0.0, 2.0], 2)?,
    ];

    let reps = 10;
    let mut sums = [0.0; 3];
    for r in 0..reps {
        let sites: Vec<[f64; 2]> = sample_poisson(&region, 1.0, 100 + r)?.iter().map(|p| [p[0], p[1]]).collect();
        let data = simulate_st_field(&field, &sites, &region, 500 + r)?;
        if r == 0 {
            println!("{} sites, ν̂ = {:.3}, λ = {:.3}", sites.len(), estimate_intensity(&data), kernel.lambda());
        }
        for (sum, lag) in sums.iter_mut().zip(&lags) {
            *sum += kernel_cov_st(&data, lag, &kernel, None, false)?.value;
        }
    }
    for (sum, lag) in sums.iter().zip(&lags) {
        let truth = field.cov(lag.h, lag.u as f64);
        println!("{:<14} mean estimate {:.4}  truth {:.4}", lag.to_string(), sum / reps as f64, truth);
    }
    Ok(())
}
