use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pathghz::cli::IDEAL_CONFIG;
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(config: &Path, scenario: &str, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathghz"))
        .arg("--config")
        .arg(config)
        .args(["--scenario", scenario, "--out"])
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

/// Header and rows of a CSV after its digest line.
fn read_csv(path: &Path) -> (String, Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let (digest, body) = text.split_once('\n').unwrap();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (digest.to_string(), header, rows)
}

fn col(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn ghz_ideal_config() {
    let out = TempDir::new().unwrap();
    let o = run(&configs().join("ideal.toml"), "ghz", out.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (digest, h, rows) = read_csv(&out.path().join("ghz.csv"));
    assert!(digest.starts_with("# config-digest: sha256:") && digest.len() == 24 + 64);
    assert_eq!(rows.len(), 1);
    assert!((col(&h, &rows[0], "fidelity") - 1.0).abs() < 1e-10);
    assert!((col(&h, &rows[0], "theta_measured") - PI / 2.0).abs() < 1e-10);
    assert!((col(&h, &rows[0], "probability") - 0.01 / 16.0).abs() < 1e-12);
    for f in ["pair_table.csv", "ghz_branches.csv", "conditional_ket.csv", "checks.csv"] {
        assert!(out.path().join(f).exists(), "{f}");
    }
}

#[test]
fn rate_row() {
    let out = TempDir::new().unwrap();
    assert!(run(&configs().join("ideal.toml"), "rate", out.path(), &[]).status.success());
    let (_, h, rows) = read_csv(&out.path().join("rate.csv"));
    assert!((col(&h, &rows[0], "rate_hz") - 625.0).abs() < 1e-9);
    assert!((col(&h, &rows[0], "simulated_rate_hz") - 625.0).abs() < 1e-9);
}

#[test]
fn oracle_check_passes_and_is_reproducible() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let cfg = configs().join("two_bin_unbalanced.toml");
    assert!(run(&cfg, "oracle-check", a.path(), &["--seed", "11"]).status.success());
    assert!(run(&cfg, "oracle-check", b.path(), &["--seed", "11"]).status.success());
    let (_, h, rows) = read_csv(&a.path().join("oracle.csv"));
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(col(&h, r, "max_deviation") < 1e-10);
        assert_eq!(r.last().unwrap(), "true");
    }
    assert_eq!(fs::read(a.path().join("oracle.csv")).unwrap(), fs::read(b.path().join("oracle.csv")).unwrap());
}

#[test]
fn rerun_overwrites_identically() {
    let out = TempDir::new().unwrap();
    let cfg = configs().join("length_sweep.toml");
    assert!(run(&cfg, "sweep", out.path(), &[]).status.success());
    let first = fs::read(out.path().join("sweep.csv")).unwrap();
    assert!(run(&cfg, "sweep", out.path(), &[]).status.success());
    assert_eq!(first, fs::read(out.path().join("sweep.csv")).unwrap());
    let (_, h, rows) = read_csv(&out.path().join("sweep.csv"));
    assert_eq!(h[0], "fanout.l_10");
    let xs: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[0] < w[1]), "rows follow sweep order");
    for r in &rows {
        assert!((col(&h, r, "theta_deviation")).abs() < 1e-10);
    }
}

#[test]
fn schmidt_scenario_matches_closed_form() {
    let out = TempDir::new().unwrap();
    assert!(run(&configs().join("correlated_bwf.toml"), "schmidt", out.path(), &[]).status.success());
    let (_, h, rows) = read_csv(&out.path().join("schmidt_summary.csv"));
    assert!((col(&h, &rows[0], "purity") - col(&h, &rows[0], "closed_form_purity")).abs() < 1e-6);
    let (_, _, coeffs) = read_csv(&out.path().join("schmidt.csv"));
    assert_eq!(coeffs.len(), 64);
}

#[test]
fn bell_scenario() {
    let out = TempDir::new().unwrap();
    assert!(run(&configs().join("ideal.toml"), "bell", out.path(), &[]).status.success());
    let (_, h, rows) = read_csv(&out.path().join("bell.csv"));
    assert!((col(&h, &rows[0], "fidelity") - 1.0).abs() < 1e-10);
    assert!((col(&h, &rows[0], "beta_ratio") - 0.25).abs() < 1e-12);
}

#[test]
fn validation_failures_exit_1() {
    let dir = TempDir::new().unwrap();
    let bad = write_config(&dir, &IDEAL_CONFIG.replace("r1 = 0.7071067811865476", "r1 = 0.5"));
    let o = run(&bad, "ghz", &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fanout"));

    let typo = write_config(&dir, &IDEAL_CONFIG.replace("phi2 = \"pi/2\"", "phi2 = \"pi/two\""));
    let o = run(&typo, "ghz", &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("source.phi2"));

    let multi = write_config(&dir, &IDEAL_CONFIG.replace("k0 = 0.0", "k0 = 0.0\ndk = 0.5\nn_bins = 2"));
    assert_eq!(run(&multi, "bell", &dir.path().join("out"), &[]).status.code(), Some(1));

    let good = write_config(&dir, IDEAL_CONFIG);
    assert_eq!(run(&good, "teleport", &dir.path().join("out"), &[]).status.code(), Some(1));
    assert_eq!(run(&good, "sweep", &dir.path().join("out"), &[]).status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_2() {
    let dir = TempDir::new().unwrap();
    let dark = write_config(&dir, &IDEAL_CONFIG.replace("beta = { abs2 = 0.1 }", "beta = 0.0"));
    let o = run(&dark, "ghz", &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_ideal_config_matches_embedded_one() {
    let shipped = pathghz::cli::load_config(&configs().join("ideal.toml")).unwrap();
    let embedded = pathghz::cli::load_config_str(IDEAL_CONFIG).unwrap();
    assert_eq!(shipped.config, embedded.config);
}
