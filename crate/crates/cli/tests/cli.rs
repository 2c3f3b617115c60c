use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SPEC: &str = r#"{"index_set":"Z","lambda_head":{"offset":0,"values":[]},"lambda_tail":{"slope":1,"intercept":0},"gap":1}"#;
const TARGET: &str = r#"{"nu_head":{"offset":0,"values":[[0.25,0],[1.1,0]]},"tail":"equals_lambda"}"#;

fn rank1(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rank1")).args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Inverts the two-point target and returns the coefficient file.
fn two_point_coeffs(dir: &TempDir) -> PathBuf {
    let spec = write(dir, "spec.json", SPEC);
    let target = write(dir, "target.json", TARGET);
    let coeffs = dir.path().join("coeffs.json");
    let out = rank1(&["inverse", "--spec", s(&spec), "--target", s(&target), "--out", s(&coeffs)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    coeffs
}

#[test]
fn inverse_then_direct_recovers_target() {
    let dir = TempDir::new().unwrap();
    let coeffs = two_point_coeffs(&dir);
    let spec = dir.path().join("spec.json");
    let out_path = dir.path().join("spectrum.json");
    let out = rank1(&["direct", "--spec", s(&spec), "--coeffs", s(&coeffs), "--out", s(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["certified"], true);
    let mu = |n: i64| {
        let e = doc["entries"]
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["paired_index"] == n)
            .unwrap();
        e["mu"][0].as_f64().unwrap()
    };
    assert!((mu(0) - 0.25).abs() < 1e-12);
    assert!((mu(1) - 1.1).abs() < 1e-12);
    assert_eq!(mu(-1), -1.0);
}

#[test]
fn inverse_prints_coefficients_and_certificate() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "spec.json", SPEC);
    let target = write(&dir, "target.json", TARGET);
    let out = rank1(&["inverse", "--spec", s(&spec), "--target", s(&target)]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    let residues = doc["certificate"]["residues"].as_array().unwrap();
    assert_eq!(residues.len(), 2);
    assert!((residues[0][1][0].as_f64().unwrap() - 0.275).abs() < 1e-12);
    assert!(doc["certificate"]["max_F_vs_product_discrepancy"].as_f64().unwrap() < 1e-12);
    assert!(doc["coefficients"]["a_head"].is_object());
}

#[test]
fn gap_violation_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        &dir,
        "bad.json",
        r#"{"index_set":"Z","lambda_head":{"offset":0,"values":[0,0.5]},"lambda_tail":{"slope":1,"intercept":0},"gap":1}"#,
    );
    let target = write(&dir, "target.json", TARGET);
    let out = rank1(&["inverse", "--spec", s(&bad), "--target", s(&target)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_json_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "spec.json", "{\"index_set\": ");
    let target = write(&dir, "target.json", TARGET);
    let out = rank1(&["inverse", "--spec", s(&spec), "--target", s(&target)]);
    assert_eq!(out.status.code(), Some(1));
    let missing = rank1(&["inverse", "--spec", "/nonexistent/spec.json", "--target", s(&target)]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn fixed_phi_obstruction() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "spec.json", SPEC);
    let target = write(&dir, "target.json", TARGET);
    let phi = write(
        &dir,
        "phi.json",
        r#"{"a_head":{"offset":0,"values":[[0,0]]},"a_tail":"zero"}"#,
    );
    let out = rank1(&["inverse", "--spec", s(&spec), "--target", s(&target), "--fixed-phi", s(&phi)]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).to_lowercase().contains("zero"));
}

#[test]
fn roundtrip_reports_pass() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "spec.json", SPEC);
    let target = write(&dir, "target.json", TARGET);
    let out = rank1(&["roundtrip", "--spec", s(&spec), "--target", s(&target)]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["pass"], true);
    assert!(doc["max_deviation"].as_f64().unwrap() < 1e-8);
}

#[test]
fn oracle_matches_direct() {
    let dir = TempDir::new().unwrap();
    let coeffs = two_point_coeffs(&dir);
    let spec = dir.path().join("spec.json");
    let out = rank1(&["oracle", "--spec", s(&spec), "--coeffs", s(&coeffs), "--n", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("eigenvalues"));
}

#[test]
fn gallery_report_lines() {
    let out = rank1(&["gallery", "--example", "ex51", "--window", "120", "--report"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().filter(|l| l.contains(": PASS") || l.contains(": FAIL")).collect();
    assert!(lines.len() >= 3, "{text}");
    assert!(lines.iter().all(|l| l.contains(": PASS")));
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let coeffs = two_point_coeffs(&dir);
    let spec = dir.path().join("spec.json");
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = rank1(&["direct", "--spec", s(&spec), "--coeffs", s(&coeffs), "--out", s(&path)]);
        assert_eq!(out.status.code(), Some(0));
        fs::read(path).unwrap()
    };
    assert_eq!(run("first.json"), run("second.json"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = rank1(&["frobnicate"]);
    assert_ne!(out.status.code(), Some(0));
}
