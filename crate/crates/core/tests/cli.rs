//! End-to-end checks of the `stcov` binary.

use std::path::Path;
use std::process::{Command, Output};

fn stcov(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stcov"));
    cmd.args(args).env_remove("STCOV_SEED");
    if let Some(s) = seed {
        cmd.env("STCOV_SEED", s);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bad_setting_exits_nonzero_with_diagnostic() {
    let o = stcov(&["sigma", "--method", "bogus"], None);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.lines().any(|l| l.starts_with("error:")), "{err}");

    let o = stcov(&["simulate", "--model", "var", "--n", "5", "--out", "/dev/null"], Some("abc"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn flag_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "method = lemma1\nphi = 1.0\nself_coef = 0.5\n").unwrap();
    let from_file = stcov(&["sigma", "--config", path(&conf)], None);
    let overridden = stcov(&["sigma", "--config", path(&conf), "--self-coef", "0.2"], None);
    let plain = stcov(&["sigma", "--method", "lemma1", "--phi", "1.0", "--self-coef", "0.2"], None);
    assert!(from_file.status.success() && overridden.status.success());
    assert_ne!(stdout(&from_file), stdout(&overridden));
    assert_eq!(stdout(&overridden), stdout(&plain));
}

#[test]
fn seed_variable_makes_simulation_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = stcov(&["simulate", "--model", "var", "--n", "20", "--out", path(&out)], Some(seed));
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv", "11");
    assert_eq!(a, run("b.csv", "11"));
    assert_ne!(a, run("c.csv", "12"));
}

#[test]
fn simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("var.csv");
    let o = stcov(&["simulate", "--model", "var", "--n", "400", "--seed", "3", "--out", path(&data)], None);
    assert!(o.status.success());

    let o = stcov(&["estimate", "--mode", "station", "--input", path(&data)], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lag,estimate,pair_count,regime,raw,mean"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let est: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(est.is_finite() && est > 0.0, "{row}");
    }

    let out = dir.path().join("sigma.csv");
    let o = stcov(&["sigma", "--method", "block", "--input", path(&data), "--block-len", "40", "--out", path(&out)], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(out).unwrap().lines().count(), 3);
}
