use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("job.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_qgeom"))
        .arg("--config")
        .arg(&cfg)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn witness_noon_qutrits() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&run(dir.path(), r#"{"command": "witness", "state": "noon", "d": 3, "N": 10}"#, &[]));
    let w = &v["result"]["witness"];
    assert_eq!(w["violated"], Value::Bool(true));
    assert_eq!(w["threshold"].as_f64().unwrap(), 40.0);
    assert!((w["trace"].as_f64().unwrap() - 140.0).abs() < 1e-8);
    let meta = &v["metadata"];
    assert_eq!(meta["tool"], "qgeom");
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
    assert!(meta["cutoffs"]["rho_support_rel"].is_number());
    assert!(meta["seed"].is_number());
    assert!(meta["runtime_seconds"].is_number());
}

#[test]
fn basis_dump_has_eight_gellmann_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&run(dir.path(), r#"{"command": "basis", "d": 3}"#, &[]));
    assert_eq!(v["result"]["basis"]["generators"].as_array().unwrap().len(), 8);
}

#[test]
fn sweep_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("coarse.csv");
    let o = run(
        dir.path(),
        r#"{"command": "sweep", "N": 10, "grid": "fig4-coarse"}"#,
        &["--output", out.to_str().unwrap(), "--quiet"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let header = reader.headers().unwrap().clone();
    let a = header.iter().position(|h| h == "alpha").unwrap();
    let b = header.iter().position(|h| h == "beta").unwrap();
    let lam = header.iter().position(|h| h == "lambda_max_g1").unwrap();
    assert!(header.iter().any(|h| h == "rho_support_rel"));
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 16);
    let spot = rows
        .iter()
        .find(|r| (r[a].parse::<f64>().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12 && r[b].parse::<f64>().unwrap() == 0.0)
        .unwrap();
    assert!((spot[lam].parse::<f64>().unwrap() - 400.0).abs() < 4e-4);
    let meta: Value = serde_json::from_slice(&std::fs::read(dir.path().join("coarse.csv.meta.json")).unwrap()).unwrap();
    assert!(meta["cutoffs"]["rank_rel"].is_number());
}

#[test]
fn quiet_meta_output_is_byte_identical_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "invariance", "families": [{"family": "g1", "N": 2}], "cases_per_family": 3}"#;
    let a = run(dir.path(), cfg, &["--seed", "1", "--quiet-meta", "--threads", "1"]);
    let b = run(dir.path(), cfg, &["--seed", "1", "--quiet-meta", "--threads", "4"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v["metadata"].get("runtime_seconds").is_none());
    assert_eq!(v["metadata"]["seed"], 1);
    assert_eq!(v["result"]["pass"], Value::Bool(true));
}

#[test]
fn sweep_json_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"command": "sweep", "N": 3, "alpha_grid": [0.0, 0.5], "beta_grid": [0.0, 1.0], "format": "json"}"#;
    let a = run(dir.path(), cfg, &["--quiet-meta", "--threads", "1"]);
    let b = run(dir.path(), cfg, &["--quiet-meta", "--threads", "3"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_stdout(&run(dir.path(), r#"{"command": "basis", "d": 2, "seed": 5}"#, &["--seed", "9"]));
    assert_eq!(v["metadata"]["seed"], 9);
}

fn stderr_line(out: &Output) -> String {
    let s = String::from_utf8_lossy(&out.stderr).to_string();
    assert_eq!(s.trim_end().lines().count(), 1, "{s}");
    s
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let missing = Command::new(env!("CARGO_BIN_EXE_qgeom")).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("Usage"));

    let unknown = run(dir.path(), r#"{"command": "plot"}"#, &[]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(stderr_line(&unknown).starts_with("error code=2 kind=invalid_parameter"));

    let bad = run(dir.path(), r#"{"command": "qfim", "state": "css", "d": 3, "N": 2, "psi": [1, 1, 0]}"#, &[]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr_line(&bad).contains("kind=not_normalized"));

    let capped = run(dir.path(), r#"{"command": "qfim", "state": "css", "d": 3, "N": 10}"#, &["--cap", "20"]);
    assert_eq!(capped.status.code(), Some(3));
    assert!(stderr_line(&capped).contains("kind=dimension_cap"));

    let csv = run(dir.path(), r#"{"command": "basis", "d": 2}"#, &["--format", "csv"]);
    assert_eq!(csv.status.code(), Some(2));

    let not_json = run(dir.path(), "{", &[]);
    assert_eq!(not_json.status.code(), Some(2));
}

#[test]
fn criteria_table_printed_with_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = run(
        dir.path(),
        r#"{"command": "criteria", "state": "ghz", "d": 3, "N": 4}"#,
        &["--output", out.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.contains("pseudo-determinant"));
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!(v["result"]["criteria"]["a_opt"].as_f64().unwrap() > 16.0);
}
