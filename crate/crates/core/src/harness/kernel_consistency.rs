//! Bias of the space-time kernel estimator as the observation window grows.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{
    default_seed, parse_bool, parse_list, parse_value, parse_vector_lags, unknown_key, Configurable,
};
use super::report::{emit_report, ReportFormat, ReportTable};
use super::run_indexed;
use crate::datasets::{LagSet, RegionSpec, SpaceTimeLag};
use crate::error::{Error, Result};
use crate::estimators::{default_bandwidth, kernel_cov_st, KernelKind, KernelSpec};
use crate::simulate::{
    sample_poisson_with, CovarianceFamily, simulate_gaussian_field, simulate_st_field_with, GaussianFieldSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct KernelConsistencyConfig {
    pub field: GaussianFieldSpec,
    /// Side lengths of the square windows `[0, side]²`.
    pub sides: Vec<f64>,
    /// Series length per region size, or one length shared by all sizes.
    pub n_times: Vec<usize>,
    pub nu: f64,
    pub kernel: KernelKind,
    /// Bandwidth constant `c` in `λ = c |S_n|^{-1/6}`.
    pub bandwidth_c: f64,
    pub lags: LagSet<SpaceTimeLag>,
    pub reps: usize,
    pub seed: u64,
    pub threads: usize,
    /// Redraw the Poisson locations at every time step instead of keeping
    /// one pattern for the whole series.
    pub redraw_each_time: bool,
    pub csv: Option<PathBuf>,
    pub markdown: Option<PathBuf>,
}

impl KernelConsistencyConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            field: GaussianFieldSpec::exponential(1.0, 2.0, 1.0).expect("valid defaults"),
            sides: vec![8.0, 16.0, 32.0],
            n_times: vec![10, 20, 40],
            nu: 1.0,
            kernel: KernelKind::Gaussian,
            bandwidth_c: 1.0,
            lags: LagSet::new(vec![
                SpaceTimeLag::new([1.0, 0.0], 0).expect("finite"),
                SpaceTimeLag::new([1.0, 0.0], 1).expect("finite"),
            ])
            .expect("distinct lags"),
            reps: 200,
            seed,
            threads: 0,
            redraw_each_time: false,
            csv: None,
            markdown: None,
        }
    }

    pub fn from_env() -> Result<Self> {
        Ok(Self::with_seed(default_seed()?))
    }

    /// Series length used at region size `k`.
    pub fn n_time_at(&self, k: usize) -> usize {
        self.n_times[k.min(self.n_times.len() - 1)]
    }
}

impl Configurable for KernelConsistencyConfig {
    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let sigma2 = self.field.sigma2();
        let (phi_s, phi_t) = match self.field.family() {
            CovarianceFamily::Exponential { phi_s, phi_t } => (phi_s, phi_t),
            CovarianceFamily::SquaredExponential { length } => (length, length),
        };
        match key {
            "sigma2" => self.field = GaussianFieldSpec::exponential(parse_value(key, value)?, phi_s, phi_t)?,
            "phi_s" => self.field = GaussianFieldSpec::exponential(sigma2, parse_value(key, value)?, phi_t)?,
            "phi_t" => self.field = GaussianFieldSpec::exponential(sigma2, phi_s, parse_value(key, value)?)?,
            "sides" => self.sides = parse_list(key, value)?,
            "n_time" => self.n_times = vec![parse_value(key, value)?],
            "n_times" => self.n_times = parse_list(key, value)?,
            "nu" => self.nu = parse_value(key, value)?,
            "kernel" => self.kernel = value.parse()?,
            "bandwidth_c" => self.bandwidth_c = parse_value(key, value)?,
            "lags" => self.lags = parse_vector_lags(key, value)?,
            "reps" => self.reps = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "threads" => self.threads = parse_value(key, value)?,
            "redraw_each_time" => self.redraw_each_time = parse_bool(key, value)?,
            "csv" => self.csv = Some(PathBuf::from(value)),
            "markdown" => self.markdown = Some(PathBuf::from(value)),
            _ => return Err(unknown_key(key)),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.sides.len() < 2 {
            return Err(Error::Config("need at least two region sizes".into()));
        }
        if self.sides.windows(2).any(|w| !(w[1] > w[0])) || self.sides[0] <= 0.0 {
            return Err(Error::Config("region sides must be positive and increasing".into()));
        }
        if self.reps < 2 {
            return Err(Error::Config("reps must be >= 2".into()));
        }
        if !(self.nu > 0.0) || !(self.bandwidth_c > 0.0) {
            return Err(Error::Config("nu and bandwidth_c must be > 0".into()));
        }
        if self.n_times.len() != 1 && self.n_times.len() != self.sides.len() {
            return Err(Error::Config(format!(
                "n_times has {} entries for {} region sizes",
                self.n_times.len(),
                self.sides.len()
            )));
        }
        let shortest = self.n_times.iter().copied().min().unwrap_or(0);
        if let Some(l) = self.lags.iter().find(|l| l.u < 0 || l.u as usize >= shortest) {
            return Err(Error::Config(format!("lag {l} needs 0 <= u < n_time")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelConsistencyRow {
    pub side: f64,
    pub n_time: usize,
    pub lambda: f64,
    pub lag: String,
    pub mean: f64,
    pub truth: f64,
    pub abs_bias: f64,
    /// Monte Carlo standard error of `mean`.
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelConsistencyReport {
    pub rows: Vec<KernelConsistencyRow>,
}

impl KernelConsistencyReport {
    /// Rows of one lag, in increasing region size.
    pub fn for_lag(&self, lag: &str) -> Vec<&KernelConsistencyRow> {
        self.rows.iter().filter(|r| r.lag == lag).collect()
    }

    pub fn table(&self) -> ReportTable {
        ReportTable {
            title: "Kernel estimator bias by region size".into(),
            columns: ["case", "lambda", "mean", "truth", "abs_bias", "se"]
                .map(String::from)
                .to_vec(),
            row_labels: self.rows.iter().map(|r| format!("side={} n={} {}", r.side, r.n_time, r.lag)).collect(),
            values: self
                .rows
                .iter()
                .map(|r| vec![r.lambda, r.mean, r.truth, r.abs_bias, r.se])
                .collect(),
            decimals: 4,
        }
    }

    pub fn write_outputs(&self, cfg: &KernelConsistencyConfig) -> Result<()> {
        let t = self.table();
        if let Some(p) = &cfg.csv {
            emit_report(&t, ReportFormat::Csv, p)?;
        }
        if let Some(p) = &cfg.markdown {
            emit_report(&t, ReportFormat::Markdown, p)?;
        }
        Ok(())
    }
}

/// One replicate at one region size: estimates at every lag.
fn replicate(
    cfg: &KernelConsistencyConfig,
    region: &RegionSpec,
    kernel: &KernelSpec,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = if cfg.redraw_each_time {
        let mut locs = Vec::new();
        for t in 1..=region.n_time().unwrap_or(0) {
            for s in sample_poisson_with(region, cfg.nu, &mut rng)? {
                locs.push([s[0], s[1], t as f64]);
            }
        }
        let field_seed = rand::Rng::random::<u64>(&mut rng);
        simulate_gaussian_field(&cfg.field, &locs, region, field_seed)?
    } else {
        let sites: Vec<[f64; 2]> = sample_poisson_with(region, cfg.nu, &mut rng)?
            .into_iter()
            .map(|s| [s[0], s[1]])
            .collect();
        simulate_st_field_with(&cfg.field, &sites, region, &mut rng)?
    };
    cfg.lags
        .iter()
        .map(|lag| kernel_cov_st(&data, lag, kernel, Some(cfg.nu), false).map(|e| e.value))
        .collect()
}

/// Average the kernel estimator over `reps` Poisson-sampled fields for each
/// region size. Region `k` uses seeds `seed + (k << 32) + r`.
pub fn run_kernel_consistency(cfg: &KernelConsistencyConfig) -> Result<KernelConsistencyReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (k, &side) in cfg.sides.iter().enumerate() {
        let region = RegionSpec::square(side, cfg.n_time_at(k))?;
        let lambda = default_bandwidth(&region, cfg.bandwidth_c);
        let kernel = KernelSpec::new(cfg.kernel, 2, lambda)?;
        let base = cfg.seed.wrapping_add((k as u64) << 32);
        let reps = run_indexed(cfg.threads, cfg.reps, |r| {
            replicate(cfg, &region, &kernel, base.wrapping_add(r as u64))
        })?;
        for (j, lag) in cfg.lags.iter().enumerate() {
            let vals: Vec<f64> = reps.iter().map(|v| v[j]).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let truth = cfg.field.cov(lag.h, lag.u as f64);
            rows.push(KernelConsistencyRow {
                side,
                n_time: cfg.n_time_at(k),
                lambda,
                lag: lag.to_string(),
                mean,
                truth,
                abs_bias: (mean - truth).abs(),
                se: (var / n).sqrt(),
            });
        }
    }
    Ok(KernelConsistencyReport { rows })
}
