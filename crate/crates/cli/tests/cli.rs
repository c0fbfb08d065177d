//! Black-box tests of the binary: exit codes, output files, error surfaces.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_ofdm-frontier")
}

fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../examples")
}

fn run(args: &[&str]) -> Output {
    Command::new(exe()).args(args).output().expect("binary runs")
}

#[test]
fn validate_accepts_shipped_scenarios() {
    for name in [
        "paper_fig3a.json",
        "paper_fig3b.json",
        "paper_fig3c.json",
        "deterministic_symmetric.json",
        "empirical_trace.json",
        "smoke.json",
    ] {
        let path = examples_dir().join(name);
        let out = run(&["validate", path.to_str().unwrap()]);
        assert!(out.status.success(), "{name} should validate");
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.starts_with("OK:"), "unexpected output: {stdout}");
    }
}

#[test]
fn validate_rejects_broken_scenarios_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();

    let unreadable = dir.path().join("missing.json");
    let out = run(&["validate", unreadable.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let bad_json = dir.path().join("bad.json");
    std::fs::write(&bad_json, "{ not json").unwrap();
    let out = run(&["validate", bad_json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("parse error"), "stderr: {stderr}");

    // Valid JSON, invalid correlation coefficient.
    let text = std::fs::read_to_string(examples_dir().join("smoke.json")).unwrap();
    let bad_corr = dir.path().join("bad_corr.json");
    std::fs::write(&bad_corr, text.replace("0.3", "2.0")).unwrap();
    let out = run(&["validate", bad_corr.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("correlation"), "stderr: {stderr}");

    // Missing field names the field.
    let text = std::fs::read_to_string(examples_dir().join("smoke.json")).unwrap();
    let no_power = dir.path().join("no_power.json");
    std::fs::write(&no_power, text.replace("\"total_power_w\": 1.0,", "")).unwrap();
    let out = run(&["validate", no_power.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("total_power_w"), "stderr: {stderr}");
}

#[test]
fn unknown_flags_exit_1() {
    let out = run(&["frontier", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("frontier"));
    assert!(stdout.contains("numerology"));
}

#[test]
fn frontier_writes_requested_outputs_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("cloud.csv");
    let report = dir.path().join("report.json");
    let scenario = examples_dir().join("smoke.json");
    let out = run(&[
        "frontier",
        scenario.to_str().unwrap(),
        "--out-cloud",
        cloud.to_str().unwrap(),
        "--out-report",
        report.to_str().unwrap(),
        "--portfolios",
        "64",
        "--draws",
        "128",
        "--seed",
        "99",
    ]);
    assert!(out.status.success());

    let csv = std::fs::read_to_string(&cloud).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "id,w_1,w_2,w_3,mean_bps,sd_bps,on_frontier,is_single_band"
    );
    assert_eq!(lines.count(), 64 + 3, "64 sampled portfolios + 3 baselines");

    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["seed"], 99);
    assert_eq!(parsed["n_portfolios"], 64);
    assert_eq!(parsed["n_draws"], 128);
    assert_eq!(parsed["scenario"]["run"]["seed"], 99);
    assert_eq!(parsed["cloud"].as_array().unwrap().len(), 67);
    assert!(parsed["improvement_pct"].as_f64().unwrap().is_finite());
    assert!(parsed.get("timing").is_none(), "timing must not be in the report file");
}

#[test]
fn runtime_failure_exits_2() {
    // Validates fine (gains may be zero) but no band can carry traffic, so
    // the improvement ratio has a zero baseline at run time.
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(examples_dir().join("smoke.json")).unwrap();
    let dead = text
        .replace("\"channel_gain\": 1.4,", "\"channel_gain\": 0.0,")
        .replace("\"channel_gain\": 0.36,", "\"channel_gain\": 0.0,")
        .replace("\"channel_gain\": 1.37,", "\"channel_gain\": 0.0,");
    let path = dir.path().join("dead.json");
    std::fs::write(&path, dead).unwrap();

    let out = run(&["frontier", path.to_str().unwrap(), "--portfolios", "5", "--draws", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("improvement ratio"),
        "stage context missing: {stderr}"
    );
}

#[test]
fn baseline_lists_each_band() {
    let scenario = examples_dir().join("smoke.json");
    let out = run(&["baseline", scenario.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("band 0:"));
    assert!(stdout.contains("band 2:"));
    assert!(stdout.contains("best single band:"));
}

#[test]
fn numerology_prints_geometry_and_rejects_bad_partitions() {
    let out = run(&["numerology", "--mu", "4", "--payload", "1200", "--bands", "3"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("240 kHz"));
    assert!(stdout.contains("288 MHz"));
    assert!(stdout.contains("3 x 96 MHz"));

    let out = run(&["numerology", "--mu", "4", "--payload", "1200", "--bands", "7"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["numerology", "--mu", "9", "--payload", "1200", "--bands", "3"]);
    assert_eq!(out.status.code(), Some(1));
}
