//! Block-subsampling estimate of Σ from one long station series, next to the
//! closed-form Gaussian value.

use stcov::asymcov::{sigma_block_subsample_station, sigma_station_gaussian, Truncation, VarCrossCov};
use stcov::datasets::{LagSet, DEFAULT_SITE_TOL};
use stcov::estimators::StationOptions;
use stcov::simulate::{build_var_model, simulate_var};

fn main() -> stcov::Result<()> {
    let model = build_var_model(3, 1.0, 0.2, 0.1)?;
    let lags = LagSet::unit_norm_pair();
    let data = simulate_var(&model, 20_000, 2)?;

    let block = sigma_block_subsample_station(&data, &lags, &StationOptions::default(), 200)?;
    let exact = sigma_station_gaussian(&VarCrossCov::new(&model)?, model.sites(), &lags, DEFAULT_SITE_TOL, Truncation::Auto)?;
    println!("block subsample\n{block}");
    println!("closed form\n{exact}");
    Ok(())
}
