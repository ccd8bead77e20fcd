//! Configurations and runners behind the `sigma`, `estimate` and `simulate`
//! subcommands.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{
    default_seed, parse_bool, parse_lag_classes, parse_list, parse_value, parse_vector_lags,
    unknown_key, Configurable,
};
use crate::asymcov::{
    sigma_block_subsample_lattice, sigma_block_subsample_station, sigma_kernel_theoretical,
    sigma_lattice_plugin, sigma_station_gaussian, KernelLags, PluginWindow, SigmaMatrix,
    Truncation, VarCrossCov,
};
use crate::datasets::{
    load_lattice_csv, load_point_csv, load_station_csv, save_point_csv, save_station_csv, PointMode,
    RegionSpec, DEFAULT_SITE_TOL,
};
use crate::error::{Error, Result};
use crate::estimators::{
    default_bandwidth, kernel_cov_r3, kernel_cov_st, mean_corrected_lattice, mean_corrected_station,
    moment_cov_lattice, moment_cov_station, CovEstimate, KernelKind, KernelSpec, StationDivisor,
    StationOptions,
};
use crate::numeric::sig6;
use crate::simulate::{
    build_var_model, sample_poisson_with, simulate_convolution_field_with, simulate_st_field_with,
    GaussianFieldSpec, VarSimulator,
};

fn parse_truncation(key: &str, value: &str) -> Result<Truncation> {
    if value.trim().eq_ignore_ascii_case("auto") {
        Ok(Truncation::Auto)
    } else {
        Ok(Truncation::Fixed(parse_value(key, value)?))
    }
}

fn parse_points3(key: &str, value: &str) -> Result<Vec<[f64; 3]>> {
    value
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let v: Vec<f64> = parse_list(key, s)?;
            match v.as_slice() {
                &[a, b, c] => Ok([a, b, c]),
                _ => Err(Error::Config(format!("{key}: expected three numbers in '{s}'"))),
            }
        })
        .collect()
}

/// Region from `x0,y0,x1,y1` (space-time, with `n_time`) or
/// `x0,y0,z0,x1,y1,z1` (3-d).
fn parse_region(key: &str, value: &str, n_time: Option<usize>) -> Result<RegionSpec> {
    let v: Vec<f64> = parse_list(key, value)?;
    match v.len() {
        4 => RegionSpec::new(v[..2].to_vec(), v[2..].to_vec(), n_time),
        6 => RegionSpec::new(v[..3].to_vec(), v[3..].to_vec(), None),
        n => Err(Error::Config(format!("{key}: expected 4 or 6 numbers, got {n}"))),
    }
}

fn require<'a, T>(value: &'a Option<T>, key: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::Config(format!("missing required setting '{key}'")))
}

macro_rules! str_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq)]
        pub enum $name {
            $($variant),+
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text => Ok(Self::$variant),)+
                    other => Err(Error::Config(format!(
                        "unknown {} '{other}' (expected one of: {})",
                        stringify!($name),
                        [$($text),+].join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self {
                    $(Self::$variant => $text),+
                })
            }
        }
    };
}

str_enum!(SigmaKind {
    Lemma1 => "lemma1",
    Block => "block",
    Plugin => "plugin",
    KernelSt => "kernel-st",
    Kernel3d => "kernel-3d",
});

str_enum!(EstimateKind {
    Station => "station",
    Lattice => "lattice",
    PointsSt => "points-st",
    Points3d => "points-3d",
});

str_enum!(SimulateKind {
    Var => "var",
    StField => "st-field",
    Field3d => "field-3d",
});

/// Model of the spatial VAR(1) process shared by `sigma` and `simulate`.
#[derive(Clone, Debug, PartialEq)]
pub struct VarSettings {
    pub grid_side: usize,
    pub phi: f64,
    pub self_coef: f64,
    pub neighbor_coef: f64,
}

impl Default for VarSettings {
    fn default() -> Self {
        Self {
            grid_side: 3,
            phi: 1.0,
            self_coef: 0.2,
            neighbor_coef: 0.1,
        }
    }
}

impl VarSettings {
    fn apply(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "grid_side" => self.grid_side = parse_value(key, value)?,
            "phi" => self.phi = parse_value(key, value)?,
            "self_coef" => self.self_coef = parse_value(key, value)?,
            "neighbor_coef" => self.neighbor_coef = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Parameters of a Gaussian field: exponential unless `length` is set, in
/// which case the squared-exponential family is used.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSettings {
    pub sigma2: f64,
    pub phi_s: f64,
    pub phi_t: f64,
    pub length: Option<f64>,
}

impl Default for FieldSettings {
    fn default() -> Self {
        Self {
            sigma2: 1.0,
            phi_s: 2.0,
            phi_t: 1.0,
            length: None,
        }
    }
}

impl FieldSettings {
    fn apply(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "sigma2" => self.sigma2 = parse_value(key, value)?,
            "phi_s" => self.phi_s = parse_value(key, value)?,
            "phi_t" => self.phi_t = parse_value(key, value)?,
            "length" => self.length = Some(parse_value(key, value)?),
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn spec(&self) -> Result<GaussianFieldSpec> {
        match self.length {
            Some(l) => GaussianFieldSpec::squared_exponential(self.sigma2, l),
            None => GaussianFieldSpec::exponential(self.sigma2, self.phi_s, self.phi_t),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaConfig {
    pub method: SigmaKind,
    /// Data file for the data-driven methods (`block`, `plugin`).
    pub input: Option<PathBuf>,
    /// Lags, `;`-separated. Their syntax follows the method: lag classes for
    /// `lemma1` and station `block`, `hx,hy,u` for `plugin` and `kernel-st`,
    /// `kx,ky,kz` for `kernel-3d`.
    pub lags: Option<String>,
    pub var: VarSettings,
    pub field: FieldSettings,
    pub truncation: Truncation,
    pub block_len: usize,
    /// Treat the block input as a lattice file instead of a station file.
    pub lattice: bool,
    pub window: PluginWindow,
    pub kernel: KernelKind,
    pub bandwidth: Option<f64>,
    pub nu: f64,
    pub out: Option<PathBuf>,
}

impl Default for SigmaConfig {
    fn default() -> Self {
        Self {
            method: SigmaKind::Lemma1,
            input: None,
            lags: None,
            var: VarSettings::default(),
            field: FieldSettings::default(),
            truncation: Truncation::Auto,
            block_len: 50,
            lattice: false,
            window: PluginWindow::default(),
            kernel: KernelKind::Gaussian,
            bandwidth: None,
            nu: 1.0,
            out: None,
        }
    }
}

impl Configurable for SigmaConfig {
    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        if self.var.apply(key, value)? || self.field.apply(key, value)? {
            return Ok(());
        }
        match key {
            "method" => self.method = value.parse()?,
            "input" => self.input = Some(PathBuf::from(value)),
            "lags" => self.lags = Some(value.to_string()),
            "truncation" => self.truncation = parse_truncation(key, value)?,
            "block_len" => self.block_len = parse_value(key, value)?,
            "lattice" => self.lattice = parse_bool(key, value)?,
            "window_spatial" => self.window.spatial = parse_value(key, value)?,
            "window_temporal" => self.window.temporal = parse_value(key, value)?,
            "kernel" => self.kernel = value.parse()?,
            "bandwidth" => self.bandwidth = Some(parse_value(key, value)?),
            "nu" => self.nu = parse_value(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(unknown_key(key)),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        match self.method {
            SigmaKind::Block | SigmaKind::Plugin => {
                require(&self.input, "input")?;
            }
            SigmaKind::KernelSt | SigmaKind::Kernel3d => {
                require(&self.bandwidth, "bandwidth")?;
            }
            SigmaKind::Lemma1 => {}
        }
        Ok(())
    }
}

fn default_lags(method: SigmaKind) -> &'static str {
    match method {
        SigmaKind::Kernel3d => "1,0,0",
        _ => "iso:1,0;iso:1,1",
    }
}

fn vector_lags_of(cfg: &SigmaConfig) -> Result<crate::datasets::LagSet> {
    parse_vector_lags("lags", cfg.lags.as_deref().unwrap_or("1,0,0;1,0,1"))
}

pub fn run_sigma(cfg: &SigmaConfig) -> Result<SigmaMatrix> {
    cfg.validate()?;
    let lag_text = cfg.lags.as_deref().unwrap_or(default_lags(cfg.method));
    match cfg.method {
        SigmaKind::Lemma1 => {
            let lags = parse_lag_classes("lags", lag_text)?;
            let v = &cfg.var;
            let model = build_var_model(v.grid_side, v.phi, v.self_coef, v.neighbor_coef)?;
            let cc = VarCrossCov::new(&model)?;
            sigma_station_gaussian(&cc, model.sites(), &lags, DEFAULT_SITE_TOL, cfg.truncation)
        }
        SigmaKind::Block => {
            let input = require(&cfg.input, "input")?;
            if cfg.lattice {
                let data = load_lattice_csv(input)?;
                sigma_block_subsample_lattice(&data, &vector_lags_of(cfg)?, cfg.block_len)
            } else {
                let data = load_station_csv(input)?;
                let lags = parse_lag_classes("lags", lag_text)?;
                sigma_block_subsample_station(&data, &lags, &StationOptions::default(), cfg.block_len)
            }
        }
        SigmaKind::Plugin => {
            let data = load_lattice_csv(require(&cfg.input, "input")?)?;
            sigma_lattice_plugin(&data, &vector_lags_of(cfg)?, cfg.window)
        }
        SigmaKind::KernelSt | SigmaKind::Kernel3d => {
            let (dim, lags) = if cfg.method == SigmaKind::KernelSt {
                (2, KernelLags::SpaceTime(vector_lags_of(cfg)?))
            } else {
                (3, KernelLags::Full3d(parse_points3("lags", lag_text)?))
            };
            let kernel = KernelSpec::new(cfg.kernel, dim, *require(&cfg.bandwidth, "bandwidth")?)?;
            sigma_kernel_theoretical(&cfg.field.spec()?, &lags, &kernel, cfg.nu, cfg.truncation)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateConfig {
    pub mode: EstimateKind,
    pub input: Option<PathBuf>,
    pub lags: Option<String>,
    pub mean_correct: bool,
    /// Station divisor `|S(h)|(n − u)` instead of `|S(h)| n`.
    pub unbiased: bool,
    pub kernel: KernelKind,
    /// Bandwidth `λ`; when unset, `bandwidth_c` times the default rate.
    pub bandwidth: Option<f64>,
    pub bandwidth_c: f64,
    /// Known intensity; estimated from the data when unset.
    pub nu: Option<f64>,
    pub region: Option<String>,
    pub n_time: Option<usize>,
    /// Keep same-location pairs at nonzero time lags (space-time points).
    pub include_same_site: bool,
    pub out: Option<PathBuf>,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            mode: EstimateKind::Station,
            input: None,
            lags: None,
            mean_correct: false,
            unbiased: false,
            kernel: KernelKind::Gaussian,
            bandwidth: None,
            bandwidth_c: 1.0,
            nu: None,
            region: None,
            n_time: None,
            include_same_site: false,
            out: None,
        }
    }
}

impl Configurable for EstimateConfig {
    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "mode" => self.mode = value.parse()?,
            "input" => self.input = Some(PathBuf::from(value)),
            "lags" => self.lags = Some(value.to_string()),
            "mean_correct" => self.mean_correct = parse_bool(key, value)?,
            "unbiased" => self.unbiased = parse_bool(key, value)?,
            "kernel" => self.kernel = value.parse()?,
            "bandwidth" => self.bandwidth = Some(parse_value(key, value)?),
            "bandwidth_c" => self.bandwidth_c = parse_value(key, value)?,
            "nu" => self.nu = Some(parse_value(key, value)?),
            "region" => self.region = Some(value.to_string()),
            "n_time" => self.n_time = Some(parse_value(key, value)?),
            "include_same_site" => self.include_same_site = parse_bool(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(unknown_key(key)),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        require(&self.input, "input")?;
        let points = matches!(self.mode, EstimateKind::PointsSt | EstimateKind::Points3d);
        if points {
            require(&self.region, "region")?;
            if self.mean_correct {
                return Err(Error::Config("mean_correct applies to moment estimators only".into()));
            }
        }
        if self.mode == EstimateKind::PointsSt {
            require(&self.n_time, "n_time")?;
        }
        Ok(())
    }
}

/// One output line of `estimate`: the estimate, and for mean-corrected runs
/// the uncorrected value and grand mean as well.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRow {
    pub estimate: CovEstimate,
    pub raw: Option<f64>,
    pub mean: Option<f64>,
}

pub fn run_estimate(cfg: &EstimateConfig) -> Result<Vec<EstimateRow>> {
    cfg.validate()?;
    let input = require(&cfg.input, "input")?;
    let plain = |estimate| EstimateRow {
        estimate,
        raw: None,
        mean: None,
    };
    match cfg.mode {
        EstimateKind::Station => {
            let data = load_station_csv(input)?;
            let lags = parse_lag_classes("lags", cfg.lags.as_deref().unwrap_or("iso:1,0;iso:1,1"))?;
            let opts = StationOptions {
                divisor: if cfg.unbiased {
                    StationDivisor::Unbiased
                } else {
                    StationDivisor::Full
                },
                ..StationOptions::default()
            };
            lags.iter()
                .map(|lag| {
                    let mut est = moment_cov_station(&data, lag, &opts)?;
                    if !cfg.mean_correct {
                        return Ok(plain(est));
                    }
                    let mc = mean_corrected_station(&data, lag, &opts)?;
                    est.value = mc.corrected;
                    Ok(EstimateRow {
                        estimate: est,
                        raw: Some(mc.raw),
                        mean: Some(mc.mean),
                    })
                })
                .collect()
        }
        EstimateKind::Lattice => {
            let data = load_lattice_csv(input)?;
            let lags = parse_vector_lags("lags", cfg.lags.as_deref().unwrap_or("1,0,0;0,0,1"))?;
            lags.iter()
                .map(|lag| {
                    let mut est = moment_cov_lattice(&data, lag)?;
                    if !cfg.mean_correct {
                        return Ok(plain(est));
                    }
                    let mc = mean_corrected_lattice(&data, lag)?;
                    est.value = mc.corrected;
                    Ok(EstimateRow {
                        estimate: est,
                        raw: Some(mc.raw),
                        mean: Some(mc.mean),
                    })
                })
                .collect()
        }
        EstimateKind::PointsSt => {
            let region = parse_region("region", require(&cfg.region, "region")?, cfg.n_time)?;
            let data = load_point_csv(input, PointMode::SpaceTime, region.clone())?;
            let lambda = cfg.bandwidth.unwrap_or_else(|| default_bandwidth(&region, cfg.bandwidth_c));
            let kernel = KernelSpec::new(cfg.kernel, 2, lambda)?;
            let lags = parse_vector_lags("lags", cfg.lags.as_deref().unwrap_or("1,0,0;1,0,1"))?;
            lags.iter()
                .map(|lag| kernel_cov_st(&data, lag, &kernel, cfg.nu, cfg.include_same_site).map(plain))
                .collect()
        }
        EstimateKind::Points3d => {
            let region = parse_region("region", require(&cfg.region, "region")?, None)?;
            let data = load_point_csv(input, PointMode::Full3d, region.clone())?;
            let lambda = cfg.bandwidth.unwrap_or_else(|| default_bandwidth(&region, cfg.bandwidth_c));
            let kernel = KernelSpec::new(cfg.kernel, 3, lambda)?;
            parse_points3("lags", cfg.lags.as_deref().unwrap_or("0,0,0;1,0,0"))?
                .into_iter()
                .map(|k| kernel_cov_r3(&data, k, &kernel, cfg.nu).map(plain))
                .collect()
        }
    }
}

/// CSV with columns `lag,estimate,pair_count,regime,raw,mean`; the last two
/// are empty unless the estimate was mean-corrected.
pub fn write_estimates<W: Write>(rows: &[EstimateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lag", "estimate", "pair_count", "regime", "raw", "mean"])?;
    for r in rows {
        let e = &r.estimate;
        w.write_record([
            e.lag.clone(),
            sig6(e.value),
            sig6(e.pair_count),
            e.regime.to_string(),
            r.raw.map(sig6).unwrap_or_default(),
            r.mean.map(sig6).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulateConfig {
    pub model: SimulateKind,
    /// Series length for `var`.
    pub n: usize,
    pub var: VarSettings,
    pub field: FieldSettings,
    /// Side of the square (`st-field`) or cube (`field-3d`) window.
    pub side: f64,
    pub n_time: usize,
    pub nu: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl SimulateConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            model: SimulateKind::Var,
            n: 200,
            var: VarSettings::default(),
            field: FieldSettings::default(),
            side: 10.0,
            n_time: 20,
            nu: 1.0,
            seed,
            out: None,
        }
    }

    pub fn from_env() -> Result<Self> {
        Ok(Self::with_seed(default_seed()?))
    }
}

impl Configurable for SimulateConfig {
    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        if self.var.apply(key, value)? || self.field.apply(key, value)? {
            return Ok(());
        }
        match key {
            "model" => self.model = value.parse()?,
            "n" => self.n = parse_value(key, value)?,
            "side" => self.side = parse_value(key, value)?,
            "n_time" => self.n_time = parse_value(key, value)?,
            "nu" => self.nu = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(unknown_key(key)),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        require(&self.out, "out")?;
        if self.model == SimulateKind::Field3d && self.field.length.is_none() {
            return Err(Error::Config("field-3d needs 'length' (squared-exponential scale)".into()));
        }
        if self.model == SimulateKind::Var && self.n == 0 {
            return Err(Error::Config("n must be >= 1".into()));
        }
        Ok(())
    }
}

/// Simulate the configured model and write it to `out`. Returns the number
/// of values written.
pub fn run_simulate(cfg: &SimulateConfig) -> Result<usize> {
    cfg.validate()?;
    let out = require(&cfg.out, "out")?;
    match cfg.model {
        SimulateKind::Var => {
            let v = &cfg.var;
            let model = build_var_model(v.grid_side, v.phi, v.self_coef, v.neighbor_coef)?;
            let data = VarSimulator::new(&model)?.simulate(cfg.n, cfg.seed)?;
            save_station_csv(&data, out)?;
            Ok(data.n_sites() * data.n_times())
        }
        SimulateKind::StField => {
            let region = RegionSpec::square(cfg.side, cfg.n_time)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let sites: Vec<[f64; 2]> = sample_poisson_with(&region, cfg.nu, &mut rng)?
                .into_iter()
                .map(|s| [s[0], s[1]])
                .collect();
            let data = simulate_st_field_with(&cfg.field.spec()?, &sites, &region, &mut rng)?;
            save_point_csv(&data, out)?;
            Ok(data.len())
        }
        SimulateKind::Field3d => {
            let region = RegionSpec::cube(cfg.side)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let locs: Vec<[f64; 3]> = sample_poisson_with(&region, cfg.nu, &mut rng)?
                .into_iter()
                .map(|s| [s[0], s[1], s[2]])
                .collect();
            let data = simulate_convolution_field_with(&cfg.field.spec()?, &locs, &region, &mut rng)?;
            save_point_csv(&data, out)?;
            Ok(data.len())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_then_estimate_station() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("var.csv");
        let mut sim = SimulateConfig::with_seed(11);
        sim.out = Some(path.clone());
        assert_eq!(run_simulate(&sim).unwrap(), 9 * 200);

        let mut est = EstimateConfig {
            input: Some(path),
            ..EstimateConfig::default()
        };
        let rows = run_estimate(&est).unwrap();
        assert_eq!(rows.len(), 2);
        est.mean_correct = true;
        let mc = run_estimate(&est).unwrap();
        assert_eq!(mc[0].raw, Some(rows[0].estimate.value));
        let mut buf = Vec::new();
        write_estimates(&mc, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("lag,estimate,pair_count,regime,raw,mean\n"));
    }

    #[test]
    fn sigma_methods_need_their_inputs() {
        let cfg = SigmaConfig::default();
        let s = run_sigma(&cfg).unwrap();
        assert_eq!(s.dim(), 2);
        let block = SigmaConfig {
            method: SigmaKind::Block,
            ..SigmaConfig::default()
        };
        assert!(run_sigma(&block).is_err());
        let k3 = SigmaConfig {
            method: SigmaKind::Kernel3d,
            bandwidth: Some(0.2),
            lags: Some("1,0,0;-1,0,0;0,2,0".into()),
            field: FieldSettings {
                length: Some(0.5),
                ..FieldSettings::default()
            },
            ..SigmaConfig::default()
        };
        let s = run_sigma(&k3).unwrap();
        assert_eq!(s.get(0, 1), s.get(0, 0));
        assert_eq!(s.get(0, 2), 0.0);
    }

    #[test]
    fn parse_helpers() {
        assert_eq!(parse_truncation("t", "auto").unwrap(), Truncation::Auto);
        assert_eq!(parse_truncation("t", "40").unwrap(), Truncation::Fixed(40));
        assert!(parse_points3("k", "1,2").is_err());
        let r = parse_region("region", "0,0,4,4", Some(3)).unwrap();
        assert_eq!(r.n_time(), Some(3));
        assert!("bogus".parse::<SigmaKind>().is_err());
        assert_eq!("kernel-3d".parse::<SigmaKind>().unwrap().to_string(), "kernel-3d");
    }
}
