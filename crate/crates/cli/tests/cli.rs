use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("axivort-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn axivort(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_axivort")).args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn kernel_check_defaults_pass() {
    let d = scratch("kc");
    let out = axivort(&["kernel-check", "--quick", "--out", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let summary = json(&d.join("summary.json"));
    assert_eq!(summary["pass"], Value::Bool(true));
    let manifest = json(&d.join("manifest.json"));
    assert_eq!(manifest["oracle_constants_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["config"]["kernel"]["rel_tol"], serde_json::json!(1e-10));
}

#[test]
fn corrupted_tolerance_fails_by_name() {
    let d = scratch("kc-bad");
    let cfg = write_config(&d, r#"{"kernel": {"rel_tol": 10}}"#);
    let out = axivort(&["kernel-check", "--config", &cfg, "--out", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL symmetry"), "{stdout}");
    assert!(stdout.contains("FAIL oracle_v1"), "{stdout}");
    assert!(stdout.contains("rel_tol"), "{stdout}");
}

#[test]
fn missing_config_is_a_usage_error() {
    let d = scratch("missing");
    let out = axivort(&["kernel-check", "--config", "/nonexistent/axivort.json", "--out", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let d = scratch("typo");
    let cfg = write_config(&d, r#"{"n": 8, "t_edn": 1.0}"#);
    let out = axivort(&["single-hill", "--config", &cfg, "--out", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t_edn"));
}

#[test]
fn quick_single_hill_writes_the_diag_schema() {
    let d = scratch("hill");
    let cfg = write_config(&d, r#"{"n": 8, "t_end": 0.5, "dt": 0.25, "record_every": 1, "snapshot_every": 1}"#);
    let out = axivort(&["single-hill", "--quick", "--config", &cfg, "--out", d.to_str().unwrap()]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let diag = fs::read_to_string(d.join("diag.csv")).unwrap();
    let mut lines = diag.lines();
    assert_eq!(lines.next(), Some("# axivort-diag v1"));
    assert_eq!(
        lines.next(),
        Some("t,E_total,E_plus,E_inter,impulse_plus,mass_plus,l2_plus,z_c,tau_fit,dist_fit,u_max")
    );
    assert_eq!(lines.count(), 3);
    let snap = json(&d.join("snapshots").join("snap_0002.json"));
    assert_eq!(snap["t"], serde_json::json!(0.5));
    assert_eq!(snap["symmetry"], "plain");
    let manifest = json(&d.join("manifest.json"));
    assert_eq!(snap["config_hash"], manifest["config_sha256"]);
    let summary = json(&d.join("summary.json"));
    assert!(summary["checks"].as_array().unwrap().iter().any(|c| c["name"] == "zc_slope"));
}

#[test]
fn pair_at_time_zero_sits_at_the_floor() {
    let d = scratch("pair0");
    let cfg = write_config(&d, r#"{"n": 8, "d": 4.0, "t_end": 0.0}"#);
    let out = axivort(&["pair", "--config", &cfg, "--out", d.to_str().unwrap()]);
    assert!(out.status.code().is_some());
    let summary = json(&d.join("summary.json"));
    let r = &summary["results"];
    assert_eq!(r["dist_fit_initial"], r["floor"]);
}

#[test]
fn perturbed_pair_respects_the_band() {
    let d = scratch("pair-band");
    let cfg = write_config(&d, r#"{"n": 8, "d": 4.0, "t_end": 0.0, "perturbation": {"z_jitter": 100.0}}"#);
    let out = axivort(&["pair", "--config", &cfg, "--out", d.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("band"));
}

#[test]
fn quick_maximize_and_einter_outputs() {
    let d = scratch("max");
    let cfg = write_config(&d, r#"{"nu": 8.37758040957278, "h": 0.125}"#);
    let out = axivort(&["maximize", "--quick", "--config", &cfg, "--out", d.to_str().unwrap()]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let grid = fs::read_to_string(d.join("grid.csv")).unwrap();
    assert!(grid.starts_with("# axivort-grid v1\nr,z,xi\n"));
    let m = json(&d.join("maximize.json"));
    for key in ["mu", "nu", "lam", "alpha", "beta", "E", "iterations", "h"] {
        assert!(m.get(key).is_some(), "{key}");
    }

    let e = scratch("einter");
    let out = axivort(&["einter", "--quick", "--out", e.to_str().unwrap()]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let table = fs::read_to_string(e.join("einter.csv")).unwrap();
    assert!(table.starts_with("# axivort-einter v1\nd,E_inter,d_E_inter,d3_E_inter\n"));
    assert_eq!(table.lines().count(), 5);
}
