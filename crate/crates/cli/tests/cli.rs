//! End-to-end checks of the command-line surface: exit codes, output
//! formats, and determinism.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_contract-ptas"))
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("tempdir")
}

#[test]
fn eval_empty_set_reports_zero_g() {
    let out = bin()
        .args([
            "eval",
            "--gen",
            "complete,n=3,cost=identical(0.1)",
            "--epsilon",
            "0.1",
            "--set",
            "",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["g"], 0.0);
    assert_eq!(v["r"], 0.0);
}

#[test]
fn oracle_on_edgeless_instance() {
    let out = bin()
        .args(["oracle", "--gen", "gnp,n=8,p=0,seed=1", "--epsilon", "0.25"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["opt"], 0.0);
    assert_eq!(v["best_set"].as_array().unwrap().len(), 0);
}

#[test]
fn invalid_instance_exits_2() {
    let dir = tempdir();
    let path: PathBuf = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"n": 3, "edges": [[1,1]], "raw_costs": [0,0,0], "epsilon": 0.1}"#)
        .unwrap();
    let out = bin()
        .args(["eval", "--instance", path.to_str().unwrap(), "--set", ""])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("edges[0]"), "diagnostic names the field: {msg}");
}

#[test]
fn gen_writes_loadable_instance() {
    let dir = tempdir();
    let path = dir.path().join("inst.json");
    let status = bin()
        .args([
            "gen",
            "--gen",
            "planted,n=30,k=10,p_in=0.9,p_out=0.05,cost=uniform(0.001),seed=9",
            "--epsilon",
            "0.2",
            "--out",
            path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let out = bin()
        .args(["oracle", "--instance", path.to_str().unwrap(), "--max-n", "30"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn ptas_json_is_byte_identical_across_runs() {
    let args = [
        "ptas",
        "--gen",
        "gnp,n=18,p=0.6,cost=uniform(0.0005),seed=12",
        "--epsilon",
        "0.25",
        "--mode",
        "clairvoyant",
        "--seed",
        "99",
        "--threads",
        "2",
    ];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    let strip = |bytes: &[u8]| {
        let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
        v.as_object_mut().unwrap().remove("wall_clock_ms");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(strip(&a.stdout), strip(&b.stdout));
}

#[test]
fn compare_csv_reports_gap_within_bound() {
    let out = bin()
        .args([
            "compare",
            "--gen",
            "complete,n=3,cost=identical(0.1)",
            "--epsilon",
            "0.04",
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    // gap <= 5 sqrt(eps) = 1.0, and the exact route gives gap 0.
    let headers = csv::Reader::from_reader(text.as_bytes())
        .headers()
        .unwrap()
        .clone();
    let gap_idx = headers.iter().position(|h| h == "gap").unwrap();
    let gap: f64 = rows[0][gap_idx].parse().unwrap();
    assert!(gap.abs() <= 1e-12);
}

#[test]
fn verify_succeeds_on_healthy_instance() {
    let out = bin()
        .args([
            "verify",
            "--gen",
            "gnp,n=20,p=0.5,cost=uniform(0.001),seed=3",
            "--epsilon",
            "0.25",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["ok"], true);
}
