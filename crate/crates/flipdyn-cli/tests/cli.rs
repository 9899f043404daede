//! End-to-end CLI checks: determinism, engine equivalence, exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flipdyn"))
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn simulate_is_deterministic_and_engines_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let out_c = tmp.path().join("c");
    for (out, engine) in [(&out_a, "direct"), (&out_b, "direct"), (&out_c, "local")] {
        let status = bin()
            .args([
                "simulate",
                "--preset",
                "p3-k4",
                "--rounds",
                "40",
                "--seed",
                "9",
                "--engine",
                engine,
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = read(&out_a, "simulate.json");
    let b = read(&out_b, "simulate.json");
    assert_eq!(a, b, "same config must reproduce byte-identical output");

    let parse_final = |text: &str| -> String {
        let doc: serde_json::Value = serde_json::from_str(text).unwrap();
        doc["results"]["final_coloring"].as_str().unwrap().to_string()
    };
    let c = read(&out_c, "simulate.json");
    assert_eq!(
        parse_final(&a),
        parse_final(&c),
        "direct and message-passing engines must agree under a shared seed"
    );
}

#[test]
fn schedule_check_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    // Built-in schedules pass.
    let ok = bin()
        .args(["schedule-check", "--schedule", "vigoda", "--out", tmp.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(ok.code(), Some(0));

    // Valid schedule that fails the certificates: exit 1.
    let failing = tmp.path().join("failing.json");
    std::fs::write(&failing, r#"{"name":"point","probs":["1"]}"#).unwrap();
    let fail = bin()
        .args([
            "schedule-check",
            "--schedule",
            failing.to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(fail.code(), Some(1));

    // Invariant-violating schedule (rising probabilities): usage error 2.
    let invalid = tmp.path().join("invalid.json");
    std::fs::write(&invalid, r#"{"name":"up","probs":["1","1/4","1/2"]}"#).unwrap();
    let bad = bin()
        .args([
            "schedule-check",
            "--schedule",
            invalid.to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(bad.code(), Some(2));
}

#[test]
fn phi_scan_rejects_out_of_range_depth() {
    let tmp = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "phi-scan",
            "--schedule",
            "vigoda",
            "--d-max",
            "9",
            "--out",
            tmp.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn remark_preset_reports_counts_and_asymmetry() {
    let tmp = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["exact", "--preset", "remark-asymmetry", "--out", tmp.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "remark-asymmetry.json")).unwrap();
    assert_eq!(doc["results"]["clusters_sigma"], 12);
    assert_eq!(doc["results"]["clusters_tau"], 13);
    assert_eq!(doc["results"]["asymmetric"], true);
}

#[test]
fn couple_presets_pass() {
    let tmp = tempfile::tempdir().unwrap();
    for preset in ["lemma-3.4", "lemma-3.5"] {
        let status = bin()
            .args(["couple", "--preset", preset, "--out", tmp.path().to_str().unwrap()])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0), "preset {preset}");
    }
}

#[test]
fn local_check_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "local-check",
            "--instances",
            "20",
            "--n-max",
            "20",
            "--seed",
            "5",
            "--out",
            tmp.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&read(tmp.path(), "local-check.json")).unwrap();
    assert_eq!(doc["results"]["pass"], true);
    assert_eq!(doc["results"]["rounds_used"], serde_json::json!([12]));
}

#[test]
fn missing_config_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["couple", "--out", tmp.path().to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
