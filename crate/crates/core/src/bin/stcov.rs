//! Command-line front end. Every subcommand accepts `--config FILE` with
//! `key = value` lines; explicit flags (and `--set key=value`) override it.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stcov::harness::config::load_key_values;
use stcov::harness::{
    run_estimate, run_kernel_consistency, run_sigma, run_simulate, run_table1, write_estimates,
    Configurable, EstimateConfig, ExperimentConfig, KernelConsistencyConfig, SigmaConfig,
    SimulateConfig,
};
use stcov::{Error, Result};

#[derive(Parser)]
#[command(name = "stcov", version, about = "Space-time covariance estimators and their asymptotic covariance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// File of `key = value` settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra setting as `key=value`; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

/// Defines a clap argument group of optional string flags whose names double
/// as config keys.
macro_rules! flags {
    ($name:ident { $($field:ident),* $(,)? }) => {
        #[derive(Args)]
        struct $name {
            #[command(flatten)]
            common: Common,
            $(
                #[arg(long)]
                $field: Option<String>,
            )*
        }

        impl $name {
            fn pairs(&self) -> Result<Vec<(String, String)>> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push((stringify!($field).to_string(), v.clone()));
                    }
                )*
                for s in &self.common.set {
                    let (k, v) = s.split_once('=').ok_or_else(|| {
                        Error::Config(format!("--set expects key=value, got '{s}'"))
                    })?;
                    out.push((k.to_string(), v.to_string()));
                }
                Ok(out)
            }

            fn layer<C: Configurable>(&self, base: C) -> Result<C> {
                let file = match &self.common.config {
                    Some(p) => load_key_values(p)?,
                    None => Vec::new(),
                };
                base.layered(&file, &self.pairs()?)
            }
        }
    };
}

flags!(Table1Flags {
    grid_side, phi, self_coef, neighbor_coef, n_list, reps, lags, unbiased, seed, threads, csv, markdown, plot,
});

flags!(KernelFlags {
    sigma2, phi_s, phi_t, sides, n_time, n_times, nu, kernel, bandwidth_c, lags, reps, seed, threads,
    redraw_each_time, csv, markdown,
});

flags!(SigmaFlags {
    method, input, lags, grid_side, phi, self_coef, neighbor_coef, sigma2, phi_s, phi_t, length,
    truncation, block_len, lattice, window_spatial, window_temporal, kernel, bandwidth, nu, out,
});

flags!(EstimateFlags {
    mode, input, lags, mean_correct, unbiased, kernel, bandwidth, bandwidth_c, nu, region, n_time,
    include_same_site, out,
});

flags!(SimulateFlags {
    model, n, grid_side, phi, self_coef, neighbor_coef, sigma2, phi_s, phi_t, length, side, n_time,
    nu, seed, out,
});

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo table for the station estimator under the VAR(1) model.
    Table1(Table1Flags),
    /// Bias of the kernel estimator as the window grows.
    KernelConsistency(KernelFlags),
    /// Asymptotic covariance matrix by one of several methods.
    Sigma(SigmaFlags),
    /// Covariance estimates from a data file.
    Estimate(EstimateFlags),
    /// Write a simulated dataset to CSV.
    Simulate(SimulateFlags),
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Table1(f) => {
            let cfg = f.layer(ExperimentConfig::from_env()?)?;
            let report = run_table1(&cfg)?;
            report.write_outputs(&cfg)?;
            print!("{}", stcov::harness::render_report(&report.table(), stcov::harness::ReportFormat::Markdown)?);
        }
        Command::KernelConsistency(f) => {
            let cfg = f.layer(KernelConsistencyConfig::from_env()?)?;
            let report = run_kernel_consistency(&cfg)?;
            report.write_outputs(&cfg)?;
            print!("{}", stcov::harness::render_report(&report.table(), stcov::harness::ReportFormat::Markdown)?);
        }
        Command::Sigma(f) => {
            let cfg = f.layer(SigmaConfig::default())?;
            let sigma = run_sigma(&cfg)?;
            let mut buf = Vec::new();
            sigma.write_csv(&mut buf)?;
            write_or_print(&cfg.out, &String::from_utf8_lossy(&buf))?;
            if sigma.smallest_eigenvalue() < 0.0 {
                eprintln!("warning: Sigma has a negative eigenvalue ({})", sigma.smallest_eigenvalue());
            }
        }
        Command::Estimate(f) => {
            let cfg = f.layer(EstimateConfig::default())?;
            let rows = run_estimate(&cfg)?;
            let mut buf = Vec::new();
            write_estimates(&rows, &mut buf)?;
            write_or_print(&cfg.out, &String::from_utf8_lossy(&buf))?;
        }
        Command::Simulate(f) => {
            let cfg = f.layer(SimulateConfig::from_env()?)?;
            let n = run_simulate(&cfg)?;
            if let Some(p) = &cfg.out {
                eprintln!("wrote {n} values to {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
