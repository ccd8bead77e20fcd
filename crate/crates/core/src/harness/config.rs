//! `key = value` configuration shared by every experiment.
//!
//! Values are layered: built-in defaults (with the seed taken from the
//! `STCOV_SEED` environment variable when set), then a config file, then
//! command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::datasets::{LagClass, LagSet, SpaceTimeLag};
use crate::error::{Error, Result};

pub const SEED_ENV: &str = "STCOV_SEED";
pub const FALLBACK_SEED: u64 = 20_050_817;

/// Seed from `STCOV_SEED`, or [`FALLBACK_SEED`] when unset.
pub fn default_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(FALLBACK_SEED),
        Err(e) => Err(Error::Config(format!("{SEED_ENV}: {e}"))),
    }
}

fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

/// Parse `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; keys are case-insensitive and `-` is read as `_`.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got '{line}'", i + 1)))?;
        if k.trim().is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((normalize_key(k), v.trim().to_string()));
    }
    Ok(out)
}

pub fn load_key_values(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_key_values(&text)
}

/// A configuration that can be filled from `key = value` pairs.
pub trait Configurable: Sized {
    fn apply(&mut self, key: &str, value: &str) -> Result<()>;

    fn validate(&self) -> Result<()>;

    /// Apply file pairs, then flag pairs (so flags win), then validate.
    fn layered(mut self, file: &[(String, String)], flags: &[(String, String)]) -> Result<Self> {
        for (k, v) in file.iter().chain(flags) {
            self.apply(&normalize_key(k), v)?;
        }
        self.validate()?;
        Ok(self)
    }
}

pub(crate) fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

pub(crate) fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got '{value}'"))),
    }
}

pub(crate) fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

/// Lags are separated by `;` because a single lag contains commas.
pub(crate) fn parse_lag_classes(key: &str, value: &str) -> Result<LagSet<LagClass>> {
    let lags = value
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<LagClass>())
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Config(format!("{key}: {e}")))?;
    LagSet::new(lags)
}

pub(crate) fn parse_vector_lags(key: &str, value: &str) -> Result<LagSet<SpaceTimeLag>> {
    let lags = value
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<SpaceTimeLag>())
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Config(format!("{key}: {e}")))?;
    LagSet::new(lags)
}

pub(crate) fn unknown_key(key: &str) -> Error {
    Error::Config(format!("unknown setting '{key}'"))
}

/// Settings of the VAR(1) Monte Carlo experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub grid_side: usize,
    pub phi: f64,
    pub self_coef: f64,
    pub neighbor_coef: f64,
    pub n_list: Vec<usize>,
    pub n_reps: usize,
    pub lags: LagSet<LagClass>,
    /// Divide by `|S(h)|(n − u)` instead of `|S(h)| n`.
    pub unbiased: bool,
    pub seed: u64,
    /// Worker threads; 1 runs serially, 0 uses all cores.
    pub threads: usize,
    pub csv: Option<PathBuf>,
    pub markdown: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            grid_side: 3,
            phi: 1.0,
            self_coef: 0.2,
            neighbor_coef: 0.1,
            n_list: vec![3, 10, 20, 50, 70, 100, 150, 200, 500, 1000, 5000],
            n_reps: 5000,
            lags: LagSet::unit_norm_pair(),
            unbiased: false,
            seed,
            threads: 0,
            csv: None,
            markdown: None,
            plot: None,
        }
    }

    /// Defaults, with the seed from the environment when set.
    pub fn from_env() -> Result<Self> {
        Ok(Self::with_seed(default_seed()?))
    }
}

impl Configurable for ExperimentConfig {
    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "grid_side" => self.grid_side = parse_value(key, value)?,
            "phi" => self.phi = parse_value(key, value)?,
            "self_coef" => self.self_coef = parse_value(key, value)?,
            "neighbor_coef" => self.neighbor_coef = parse_value(key, value)?,
            "n_list" => self.n_list = parse_list(key, value)?,
            "reps" | "n_reps" => self.n_reps = parse_value(key, value)?,
            "lags" => self.lags = parse_lag_classes(key, value)?,
            "unbiased" => self.unbiased = parse_bool(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "threads" => self.threads = parse_value(key, value)?,
            "csv" => self.csv = Some(PathBuf::from(value)),
            "markdown" => self.markdown = Some(PathBuf::from(value)),
            "plot" => self.plot = Some(PathBuf::from(value)),
            _ => return Err(unknown_key(key)),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.n_reps < 2 {
            return Err(Error::Config(format!("reps must be >= 2, got {}", self.n_reps)));
        }
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list is empty".into()));
        }
        let max_u = self.lags.max_u();
        if max_u < 0 {
            return Err(Error::Config("temporal lags must be >= 0".into()));
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n as i64 <= max_u) {
            return Err(Error::Config(format!("n = {n} does not exceed the largest lag {max_u}")));
        }
        if self.grid_side == 0 {
            return Err(Error::Config("grid_side must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file = parse_key_values("# comment\nreps = 10\nn-list = 3, 5\n\nseed=4\n").unwrap();
        let flags = vec![("seed".to_string(), "9".to_string())];
        let c = ExperimentConfig::with_seed(1).layered(&file, &flags).unwrap();
        assert_eq!(c.n_reps, 10);
        assert_eq!(c.n_list, vec![3, 5]);
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(parse_key_values("novalue").is_err());
        let c = ExperimentConfig::with_seed(1);
        assert!(c.clone().layered(&[("colour".into(), "red".into())], &[]).is_err());
        assert!(c.clone().layered(&[("reps".into(), "1".into())], &[]).is_err());
        assert!(c.clone().layered(&[("n_list".into(), "1,5".into())], &[]).is_err());
        let lags = c.layered(&[("lags".into(), "iso:1,0; 1,0,2".into())], &[]).unwrap();
        assert_eq!(lags.lags.len(), 2);
    }
}
