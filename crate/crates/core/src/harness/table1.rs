//! Monte Carlo study of the station estimator under the spatial VAR(1) model.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::report::{emit_report, render_log_x_plot, ReportFormat, ReportTable, Series};
use super::run_indexed;
use crate::asymcov::{sigma_station_gaussian, Scaling, Truncation, VarCrossCov};
use crate::datasets::DEFAULT_SITE_TOL;
use crate::diagnostics::{mardia_kurtosis, mardia_skewness, replicate_cov, ReplicateMatrix};
use crate::error::{Error, Result};
use crate::estimators::{StationDivisor, StationEstimator, StationOptions};
use crate::simulate::{build_var_model, VarModelSpec, VarSimulator};

/// One row: `n = None` is the limiting row from the Gaussian closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Table1Row {
    pub n: Option<usize>,
    pub b1: f64,
    pub b2: f64,
    /// `|T_n| cov(Ĉ(k₁), Ĉ(k₂))`.
    pub cov: f64,
    pub var1: f64,
    pub var2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table1Report {
    pub rows: Vec<Table1Row>,
    pub labels: Vec<String>,
}

impl Table1Report {
    pub fn limit_row(&self) -> Option<&Table1Row> {
        self.rows.iter().find(|r| r.n.is_none())
    }

    pub fn row(&self, n: usize) -> Option<&Table1Row> {
        self.rows.iter().find(|r| r.n == Some(n))
    }

    pub fn table(&self) -> ReportTable {
        ReportTable {
            title: format!("Station estimator at lags {}", self.labels.join(" and ")),
            columns: ["n", "b1", "b2", "|T_n| cov", "|T_n| var1", "|T_n| var2"]
                .map(String::from)
                .to_vec(),
            row_labels: self
                .rows
                .iter()
                .map(|r| r.n.map_or("inf".to_string(), |n| n.to_string()))
                .collect(),
            values: self
                .rows
                .iter()
                .map(|r| vec![r.b1, r.b2, r.cov, r.var1, r.var2])
                .collect(),
            decimals: 3,
        }
    }

    /// SVG of `b₁,₂` and `b₂,₂` against `n` on a log axis.
    pub fn plot_svg(&self) -> Result<String> {
        let finite: Vec<&Table1Row> = self.rows.iter().filter(|r| r.n.is_some()).collect();
        let series = [
            Series {
                name: "Mardia skewness b1,2".into(),
                points: finite.iter().map(|r| (r.n.unwrap() as f64, r.b1)).collect(),
            },
            Series {
                name: "Mardia kurtosis b2,2".into(),
                points: finite.iter().map(|r| (r.n.unwrap() as f64, r.b2)).collect(),
            },
        ];
        render_log_x_plot("Normality diagnostics", "n (log scale)", &series)
    }

    /// Write whichever of CSV, markdown and plot the config asks for.
    pub fn write_outputs(&self, cfg: &ExperimentConfig) -> Result<()> {
        let t = self.table();
        if let Some(p) = &cfg.csv {
            emit_report(&t, ReportFormat::Csv, p)?;
        }
        if let Some(p) = &cfg.markdown {
            emit_report(&t, ReportFormat::Markdown, p)?;
        }
        if let Some(p) = &cfg.plot {
            write_text(p, &self.plot_svg()?)?;
        }
        Ok(())
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn table1_model(cfg: &ExperimentConfig) -> Result<VarModelSpec> {
    build_var_model(cfg.grid_side, cfg.phi, cfg.self_coef, cfg.neighbor_coef)
}

/// Seed base of the `k`-th entry of the `n` schedule; replicate `r` uses
/// `base + r`.
pub fn row_seed_base(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64) << 32)
}

/// Monte Carlo replicates of `Ĝ_n` for one `n`.
pub fn simulate_replicates(
    cfg: &ExperimentConfig,
    sim: &VarSimulator,
    est: &StationEstimator,
    n: usize,
    seed_base: u64,
) -> Result<ReplicateMatrix> {
    let rows = run_indexed(cfg.threads, cfg.n_reps, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed_base.wrapping_add(r as u64));
        let values = sim.simulate_with(n, &mut rng);
        est.estimate(&values)
    })?;
    ReplicateMatrix::new(rows, cfg.lags.labels(), n as f64, Scaling::TimeLength)
}

fn check_two_lags(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.lags.len() != 2 {
        return Err(Error::Config(format!(
            "the table needs exactly two lags, got {}",
            cfg.lags.len()
        )));
    }
    Ok(())
}

/// Limiting row: `Σ` from the Gaussian closed form, `b₁ = 0`, `b₂ = p(p+2)`.
pub fn table1_theory_row(cfg: &ExperimentConfig) -> Result<Table1Row> {
    check_two_lags(cfg)?;
    let model = table1_model(cfg)?;
    let cc = VarCrossCov::new(&model)?;
    let sigma = sigma_station_gaussian(&cc, model.sites(), &cfg.lags, DEFAULT_SITE_TOL, Truncation::Auto)?;
    Ok(Table1Row {
        n: None,
        b1: 0.0,
        b2: 8.0,
        cov: sigma.get(0, 1),
        var1: sigma.get(0, 0),
        var2: sigma.get(1, 1),
    })
}

/// Simulate every `n` in the schedule, then append the limiting row.
pub fn run_table1(cfg: &ExperimentConfig) -> Result<Table1Report> {
    use super::config::Configurable;
    cfg.validate()?;
    check_two_lags(cfg)?;
    let model = table1_model(cfg)?;
    let sim = VarSimulator::new(&model)?;
    let opts = StationOptions {
        divisor: if cfg.unbiased {
            StationDivisor::Unbiased
        } else {
            StationDivisor::Full
        },
        ..StationOptions::default()
    };
    let est = StationEstimator::new(model.sites(), &cfg.lags, &opts)?;
    let mut rows = Vec::with_capacity(cfg.n_list.len() + 1);
    for (k, &n) in cfg.n_list.iter().enumerate() {
        let sample = simulate_replicates(cfg, &sim, &est, n, row_seed_base(cfg.seed, k))?;
        let sigma = replicate_cov(&sample)?;
        rows.push(Table1Row {
            n: Some(n),
            b1: mardia_skewness(&sample)?,
            b2: mardia_kurtosis(&sample)?,
            cov: sigma.get(0, 1),
            var1: sigma.get(0, 0),
            var2: sigma.get(1, 1),
        });
    }
    rows.push(table1_theory_row(cfg)?);
    Ok(Table1Report {
        rows,
        labels: cfg.lags.labels(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoke_and_determinism() {
        let mut cfg = ExperimentConfig::with_seed(7);
        cfg.n_list = vec![3];
        cfg.n_reps = 4;
        cfg.threads = 1;
        let a = run_table1(&cfg).unwrap();
        assert_eq!(a.rows.len(), 2);
        cfg.threads = 2;
        let b = run_table1(&cfg).unwrap();
        assert_eq!(a, b);
        let csv = super::super::report::render_report(&a.table(), ReportFormat::Csv).unwrap();
        assert!(csv.starts_with("n,b1,b2,|T_n| cov,"));
    }
}
