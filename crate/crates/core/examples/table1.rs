//! Limit Σ of the station estimator under the VAR(1) model, next to a short
//! Monte Carlo run.

use stcov::harness::{render_report, run_table1, table1_theory_row, ExperimentConfig, ReportFormat};

fn main() -> stcov::Result<()> {
    let mut cfg = ExperimentConfig::from_env()?;
    cfg.n_list = vec![20, 200, 1000];
    cfg.n_reps = 500;
    cfg.threads = 0;

    let limit = table1_theory_row(&cfg)?;
    println!("limit: cov {:.4}  var1 {:.4}  var2 {:.4}", limit.cov, limit.var1, limit.var2);

    let report = run_table1(&cfg)?;
    print!("{}", render_report(&report.table(), ReportFormat::Markdown)?);
    Ok(())
}
