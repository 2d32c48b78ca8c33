//! End-to-end runs of the `liouville-harness` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liouville-harness"))
}

fn run_config(dir: &Path, name: &str, body: &str, extra: &[&str]) -> Output {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    bin()
        .arg("run")
        .arg("--config")
        .arg(&path)
        .args(extra)
        .output()
        .unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report on stdout is json")
}

#[test]
fn verify_poisson_seed_7_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "p.json",
        r#"{"mode":"verify-poisson","seed":7,"samples":100}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["status"], "pass");
    for c in r["checks"].as_array().unwrap() {
        assert!(!c["anchor"].as_str().unwrap().is_empty());
    }
}

#[test]
fn zero_amplitude_series_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let out = run_config(
        dir.path(),
        "z.json",
        r#"{"mode":"lattice-sim","initial":"zero-amplitude","t_end":1.0}"#,
        &["--series", csv.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header[0], "t");
    let i2 = header.iter().position(|h| h == "i2_re").unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert!(rows.len() > 10);
    let first: f64 = rows[0][i2].parse().unwrap();
    for row in &rows {
        assert_eq!(row[i2].parse::<f64>().unwrap(), first);
    }
    assert!(text.contains("\r\n"));
}

#[test]
fn random_initial_state_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "r.json",
        r#"{"mode":"lattice-sim","initial":"random"}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["status"], "fail");
    assert!(r["error"].is_string());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("bad.json", "{not json"),
        ("unknown.json", r#"{"mode":"verify-poisson","colour":1}"#),
        ("mode.json", r#"{"mode":"no-such-mode"}"#),
        ("dt.json", r#"{"mode":"lattice-sim","dt":-1.0}"#),
        ("nomode.json", r#"{"seed":3}"#),
    ] {
        let out = run_config(dir.path(), name, body, &[]);
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
    let out = bin()
        .args(["run", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tiny_tolerance_scale_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        dir.path(),
        "p.json",
        r#"{"mode":"verify-charges","samples":5}"#,
        &["--tolerance-scale", "1e-12"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["status"], "fail");
}

#[test]
fn timing_is_opt_in_and_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"mode":"verify-charges","samples":10,"seed":21}"#;
    let a = run_config(dir.path(), "a.json", body, &[]);
    let b = run_config(dir.path(), "b.json", body, &[]);
    assert_eq!(a.stdout, b.stdout);
    assert!(report(&a).get("timing").is_none());
    let t = run_config(dir.path(), "t.json", body, &["--timing"]);
    assert!(report(&t)["timing"]["elapsed_seconds"].is_number());
}
