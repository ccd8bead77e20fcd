//! Experiment drivers: the VAR(1) Monte Carlo table, the kernel-consistency
//! study, and the runners behind the command-line subcommands.

pub mod config;
mod drivers;
mod kernel_consistency;
pub mod report;
mod table1;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use config::{default_seed, Configurable, ExperimentConfig, SEED_ENV};
pub use drivers::{
    run_estimate, run_sigma, run_simulate, write_estimates, EstimateConfig, EstimateKind,
    EstimateRow, FieldSettings, SigmaConfig, SigmaKind, SimulateConfig, SimulateKind, VarSettings,
};
pub use kernel_consistency::{
    run_kernel_consistency, KernelConsistencyConfig, KernelConsistencyReport, KernelConsistencyRow,
};
pub use report::{emit_report, render_report, ReportFormat, ReportTable};
pub use table1::{
    row_seed_base, run_table1, simulate_replicates, table1_model, table1_theory_row, Table1Report,
    Table1Row,
};

/// Evaluate `f(0..count)` and return the results in index order. `threads`
/// of 1 runs serially; 0 uses rayon's default pool size.
pub fn run_indexed<T, F>(threads: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if threads == 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}
