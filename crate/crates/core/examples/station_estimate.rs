//! Moment estimates at fixed stations, with and without mean correction.

use stcov::datasets::{LagClass, LagSet};
use stcov::estimators::{mean_corrected_station, moment_cov_station, StationDivisor, StationOptions};
use stcov::simulate::{build_var_model, cross_cov, simulate_var, VarModelSpec};

fn main() -> stcov::Result<()> {
    let model = build_var_model(3, 1.0, 0.2, 0.1)?;
    let data = simulate_var(&model, 2000, 7)?;
    let lags: LagSet<LagClass> = LagSet::unit_norm_pair();

    for (u, lag) in lags.iter().enumerate() {
        let full = moment_cov_station(&data, lag, &StationOptions::default())?;
        let opts = StationOptions { divisor: StationDivisor::Unbiased, ..StationOptions::default() };
        let unbiased = moment_cov_station(&data, lag, &opts)?;
        let mc = mean_corrected_station(&data, lag, &StationOptions::default())?;
        println!(
            "{:<10} n-divisor {:.4}  (n-u)-divisor {:.4}  mean-corrected {:.4}  truth {:.4}",
            full.lag,
            full.value,
            unbiased.value,
            mc.corrected,
            pair_average(&model, u as i64)?
        );
    }
    Ok(())
}

/// Average of `Γ(u)[i][j]` over ordered site pairs at unit distance.
fn pair_average(model: &VarModelSpec, u: i64) -> stcov::Result<f64> {
    let gamma = cross_cov(model, u)?;
    let s = model.sites();
    let (mut sum, mut count) = (0.0, 0);
    for i in 0..s.len() {
        for j in 0..s.len() {
            let d = ((s[i][0] - s[j][0]).powi(2) + (s[i][1] - s[j][1]).powi(2)).sqrt();
            if (d - 1.0).abs() < 1e-9 {
                sum += gamma[(i, j)];
                count += 1;
            }
        }
    }
    Ok(sum / count as f64)
}
