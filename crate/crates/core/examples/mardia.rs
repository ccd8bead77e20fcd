//! Mardia skewness and kurtosis of replicated station estimates, a check of
//! the bivariate normal limit.

use stcov::datasets::LagSet;
use stcov::diagnostics::{mardia_kurtosis, mardia_skewness, replicate_cov, ReplicateMatrix};
use stcov::estimators::{StationEstimator, StationOptions};
use stcov::simulate::{build_var_model, VarSimulator};

fn main() -> stcov::Result<()> {
    let model = build_var_model(3, 1.0, 0.2, 0.1)?;
    let sim = VarSimulator::new(&model)?;
    let est = StationEstimator::new(model.sites(), &LagSet::unit_norm_pair(), &StationOptions::default())?;
    for n in [5, 50, 500] {
        let rows = (0..1000)
            .map(|r| est.estimate(sim.simulate(n, 10_000 + r)?.values()))
            .collect::<stcov::Result<Vec<_>>>()?;
        let sample = ReplicateMatrix::from_rows(rows, n as f64)?;
        let sigma = replicate_cov(&sample)?;
        println!(
            "n={n:<4} b1 {:.3}  b2 {:.3}  n·cov {:.4}",
            mardia_skewness(&sample)?,
            mardia_kurtosis(&sample)?,
            sigma.get(0, 1)
        );
    }
    println!("normal reference: b1 0, b2 8");
    Ok(())
}
