//! End-to-end tests of the binary surface: subcommands, exit codes, and the
//! byte-determinism of JSON reports.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppair"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppair"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON output")
}

#[test]
fn check_sieve_resolved_pair() {
    let out = run(&["check", "--q", "13", "--m", "14", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["results"]["method"], "SIEVE");
    assert_eq!(v["results"]["sieve"]["plan"]["e"], "6");
    assert_eq!(v["results"]["sieve"]["plan"]["s"], 4);
    // inputs echoed with defaults marked
    assert_eq!(v["inputs"]["q"], 13);
    assert_eq!(v["inputs"]["f_default"], true);
}

#[test]
fn check_tiny_pair_unresolved() {
    let out = run(&["check", "--q", "2", "--m", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("UNRESOLVED"), "{text}");
}

#[test]
fn check_small_field_falls_through_to_search() {
    let out = run(&["check", "--q", "4", "--m", "2", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["results"]["method"], "EXHAUSTIVE");
    assert!(v["results"]["search"]["strict_count"].as_u64().unwrap() > 0);
}

#[test]
fn check_large_pair_stays_unresolved() {
    // The recomputed sieve inequality certifies nothing at (41, 6) for any
    // plan, and q^m is beyond the default budget, so the verdict is an
    // explicit UNRESOLVED with the closest failing margin reported.
    let out = run(&["check", "--q", "41", "--m", "6", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["results"]["method"], "UNRESOLVED");
    assert_eq!(v["results"]["sieve"]["found"], false);
    let closest = v["results"]["sieve"]["closest_ratio"].as_f64().unwrap();
    assert!(closest > 1.0 && closest < 2.0, "closest ratio {closest}");
}

#[test]
fn check_rejects_bad_input() {
    let out = run(&["check", "--q", "1", "--m", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_reports_byte_identical_modulo_timings() {
    let a = run(&["check", "--q", "11", "--m", "5", "--format", "json"]);
    let b = run(&["check", "--q", "11", "--m", "5", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0));
    let mut va = json_of(&a);
    let mut vb = json_of(&b);
    va.as_object_mut().unwrap().remove("timings");
    vb.as_object_mut().unwrap().remove("timings");
    assert_eq!(
        serde_json::to_string(&va).unwrap(),
        serde_json::to_string(&vb).unwrap()
    );
}

#[test]
fn search_reports_witnesses() {
    let out = run(&[
        "search", "--q", "9", "--m", "2", "--mode", "proof", "--format", "json",
    ]);
    let v = json_of(&out);
    let count = v["results"]["search"]["proof_count"].as_u64().unwrap();
    if count > 0 {
        assert_eq!(out.status.code(), Some(0));
        let w = &v["results"]["search"]["witnesses"][0];
        assert!(w["alpha"].is_array());
        assert!(w["context"].as_str().unwrap().starts_with("p=3 k=2 m=2"));
    } else {
        assert_eq!(out.status.code(), Some(1));
    }
}

#[test]
fn search_budget_env_refusal() {
    let out = run_env(&["search", "--q", "11", "--m", "5"], "PPAIR_BUDGET", "1000");
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("budget"), "{text}");
}

#[test]
fn table1_reproduction_passes_with_rhs_flags() {
    let out = run(&["table1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["results"]["rows"], 26);
    assert_eq!(v["results"]["lhs_matches"], 26);
    assert!(v["results"]["delta_matches"].as_u64().unwrap() >= 24);
    // the printed rhs column never matches the recomputed inequality
    assert_eq!(v["results"]["rhs_mismatches"], 26);
    assert!(!v["discrepancies"].as_array().unwrap().is_empty());
}

#[test]
fn exceptional_reports_known_defects() {
    let out = run(&["exceptional", "--no-sieve", "--format", "json"]);
    // the printed list contains one pair that passes the base condition
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["results"]["pairs"], 157);
    let disc: Vec<String> = v["discrepancies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d.as_str().unwrap().to_string())
        .collect();
    assert!(
        disc.iter().any(|d| d.contains("157") && d.contains("162")),
        "{disc:?}"
    );
    assert!(disc.iter().any(|d| d.contains("(17, 30)")), "{disc:?}");
    assert!(disc.iter().any(|d| d.contains("221")), "{disc:?}");
}

#[test]
fn search_accepts_custom_basis() {
    let out = run(&[
        "search", "--q", "3", "--m", "2", "--basis", "0,1;1,1", "--mode", "proof", "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["inputs"]["basis"], "0,1;1,1");
    assert_eq!(v["results"]["search"]["proof_count"], 1);
    // a dependent basis is rejected with the rank in the diagnostic
    let bad = run(&["search", "--q", "3", "--m", "2", "--basis", "0,1;0,2"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("rank 1"));
}

#[test]
fn audit_small_cap_clean() {
    let out = run(&["audit", "--qm-max", "120", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["results"]["violation_count"], 0);
    assert!(v["results"]["total_checks"].as_u64().unwrap() > 0);
}

#[test]
fn thresholds_reports_reference_mismatch() {
    let out = run(&["thresholds", "--m", "4", "--format", "json"]);
    // the computed crossover is a documented mismatch with the reference
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    let row = &v["results"]["thresholds"][0];
    assert_eq!(row["m"], 4);
    assert_eq!(row["within_5_percent"], false);
    let computed = row["computed"].as_f64().unwrap();
    assert!(
        (computed - 8.97e7).abs() / 8.97e7 < 0.01,
        "computed {computed}"
    );
}
