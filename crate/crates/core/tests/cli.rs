use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sleconn")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn all_ones_meander_matrix() {
    let r = report(&["meander", "--n-pairs", "2", "--fugacity", "1"]);
    assert_eq!(r["outputs"]["det_exact"], "0");
    assert_eq!(r["outputs"]["rank"], 1);
    assert_eq!(r["provenance"]["fugacity"], 1.0);
}

#[test]
fn percolation_suite_passes() {
    let r = report(&["verify", "--suite", "kappa6", "--n-pairs", "2"]);
    assert_eq!(r["pass"], true);
    assert!(r["checks"].as_array().unwrap().len() >= 2);
}

#[test]
fn three_pair_listing() {
    let out = run(&["diagrams", "--n-pairs", "3", "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
    assert_eq!(report(&["diagrams", "--n-pairs", "3"])["outputs"]["count"], 5);
}

#[test]
fn evaluation_carries_provenance() {
    let r = report(&["evaluate-f", "--n", "2", "--theta", "1", "--kappa", "5.0", "--x", "0,0.3,0.7,1", "--json"]);
    let v = r["outputs"]["value"].as_f64().unwrap();
    assert!((v - 4.242653256082484).abs() < 1e-8 * v);
    assert_eq!(r["provenance"]["kappa"], 5.0);
    assert_eq!(r["provenance"]["n_pairs"], 2);
    assert_eq!(r["provenance"]["rel_tol"], 1e-8);
}

#[test]
fn output_is_deterministic() {
    let args = ["weights", "--kappa", "5", "--x", "0,0.7,1.6,2.5"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn probabilities_from_the_command_line() {
    let r = report(&["probs", "--coeffs", "1,1", "--kappa", "6", "--x", "0,0.7,1.6,2.5"]);
    let p: Vec<f64> = r["outputs"]["probabilities"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["evaluate-f", "--theta", "1", "--kappa", "5"]).status.code(), Some(2));
    assert_eq!(run(&["evaluate-f", "--theta", "1", "--kappa", "5", "--x", "0,1,2"]).status.code(), Some(2));
    let bad = run(&["evaluate-f", "--theta", "1", "--kappa", "9", "--x", "0,1,2,3"]);
    assert_eq!(bad.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "InvalidSpeed");
}

#[test]
fn size_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_sleconn"))
        .args(["diagrams", "--n-pairs", "4"])
        .env("SLECONN_MAX_N", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
