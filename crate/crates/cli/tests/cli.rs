//! End-to-end runs of the binary: exit codes, JSON shape, determinism.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scs-lab")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn verify_kod_certificate() {
    let v = json(&["verify-kod", "--json"]);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 5);
    assert!(checks.iter().all(|c| c["passed"] == true));
    assert_eq!(v["inputs_used"], serde_json::json!([1, 3, 5]));
}

#[test]
fn coefficients() {
    let v = json(&["coeffs", "--order", "3", "--format", "json"]);
    let c = v["coeffs"].as_array().unwrap();
    assert_eq!(c.len(), 3);
    assert_eq!(c[0]["display"], "√2/2");
    assert!((c[1]["value"].as_f64().unwrap() + 2f64.sqrt() / 4.0).abs() < 1e-15);
}

#[test]
fn golden_check_and_tampering() {
    assert_eq!(run(&["cn-table", "--check"]).status.code(), Some(0));

    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/golden/tables.json")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, &text).unwrap();
    assert_eq!(run(&["cn-table", "--check", good.to_str().unwrap()]).status.code(), Some(0));

    // flip one exact coefficient
    let tampered = text.replacen("\"1/128\"", "\"1/127\"", 1);
    assert_ne!(tampered, text);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, tampered).unwrap();
    let out = run(&["cn-table", "--check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));

    let golden = json(&["cn-table", "--golden", "--format", "json"]);
    assert_eq!(golden["B"].as_array().unwrap().len(), 5);
}

#[test]
fn uniqueness_marks_even_steps() {
    let v = json(&["uniqueness", "--d", "3", "--max-n", "5", "--json"]);
    let degenerate: Vec<u64> =
        v["steps"].as_array().unwrap().iter().filter(|s| s["status"] == "degenerate").map(|s| s["n"].as_u64().unwrap()).collect();
    assert_eq!(degenerate, vec![2, 4]);
    // unicode minus is accepted in explicit sequences
    let w = json(&["uniqueness", "--b", "1,−1/4,1/32,0,0,0", "--max-n", "5", "--json"]);
    assert_eq!(w["steps"].as_array().unwrap().len(), 5);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["bogus"][..],
        &["cf", "--alpha", "nonsense"],
        &["convolve", "--t", "1,-1"],
        &["uniqueness", "--b", "0,1"],
        &["birkhoff", "--samples", "many"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn convolve_tolerance_exit_1() {
    assert_eq!(run(&["convolve", "--t", "1,2"]).status.code(), Some(0));
    assert_eq!(run(&["convolve", "--t", "1,2", "--tol", "1e-12"]).status.code(), Some(1));
}

#[test]
fn birkhoff_is_deterministic() {
    let args = ["birkhoff", "--alpha", "golden", "--k", "6", "--samples", "20000", "--seed", "11", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = run(&["birkhoff", "--alpha", "golden", "--k", "6", "--samples", "20000", "--seed", "12", "--format", "json"]);
    assert_ne!(a.stdout, other.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["q"], 13);
    assert!(v["ks"].as_f64().unwrap() < 0.5);
}

#[test]
fn csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let out = run(&["birkhoff", "--alpha", "liouville:3", "--k", "2", "--samples", "500", "--csv", path.to_str().unwrap()]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_path(&path).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["x", "value"]);
    assert_eq!(r.records().count(), 500);

    let grid = dir.path().join("g.csv");
    let out = run(&["convolve", "--t", "1,-1", "--csv", grid.to_str().unwrap(), "--points", "11"]);
    assert!(out.status.success());
    let rows: Vec<_> = csv::Reader::from_path(&grid).unwrap().records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() > 0.0));

    let table = run(&["cf", "--alpha", "cf:2,3,4", "--format", "csv"]);
    assert!(table.status.success());
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.starts_with("n,a_n,p_n,q_n\n"));
    assert!(text.contains("3,4,"));
}
