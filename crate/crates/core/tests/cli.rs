//! End-to-end runs of the `finsler` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn metric(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/metrics").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler")).args(args).env("FINSLER_WORKERS", "1").output().unwrap()
}

fn m(name: &str) -> String {
    metric(name).display().to_string()
}

#[test]
fn all_theorems_pass_on_euclidean() {
    let out = run(&["verify", "--metric", &m("euclidean2.json"), "--sigma", "0.1*x1", "--theorems", "all", "--samples", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["items"].as_array().unwrap().len(), 11);
}

#[test]
fn impossible_tolerance_exits_one() {
    let out = run(&[
        "verify", "--metric", &m("randers2.json"), "--sigma", "0.2*x1*x2", "--theorems", "cartan-curvatures", "--samples", "3",
        "--tol", "1e-300",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn classify_reports_verdicts() {
    let out = run(&["classify", "--metric", &m("quartic2.json"), "--predicates", "riemannian,landsberg", "--samples", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let verdicts: Vec<&str> = report["items"].as_array().unwrap().iter().map(|i| i["verdict"].as_str().unwrap()).collect();
    assert_eq!(verdicts, ["holds", "fails"]);
}

#[test]
fn empty_selection_is_a_schema_error() {
    let out = run(&["verify", "--metric", &m("euclidean2.json"), "--sigma", "0", "--theorems", ""]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_metric_key_is_a_schema_error() {
    let dir = std::env::temp_dir().join(format!("finsler-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"family":"euclidean","n":2,"colour":"red"}"#).unwrap();
    let out = run(&["classify", "--metric", bad.to_str().unwrap(), "--predicates", "riemannian"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn markdown_output() {
    let out = run(&["invariance", "--metric", &m("euclidean2.json"), "--sigma", "0.3", "--propositions", "p.3a", "--samples", "3", "--format", "markdown"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("p.3a"));
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["invariance", "--metric", &m("randers2.json"), "--sigma", "0.1*x1", "--propositions", "p.6,p.8a", "--samples", "4"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
}
