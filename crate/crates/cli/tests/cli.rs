use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphsdp")).args(args).current_dir(dir).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &["evaluate", "--in", "missing"])), 2);
    assert_eq!(code(&run(d, &["generate", "--problem", "signed", "--n", "10", "--p", "1.5", "--out", "x"])), 2);
    assert_eq!(code(&run(d, &["generate", "--problem", "signed", "--n", "10"])), 2, "--out is required");
    std::fs::write(d.join("bad.txt"), "3 2\n1 2 1\n").unwrap();
    assert_eq!(code(&run(d, &["gset", "info", "--in", "bad.txt"])), 2);
    std::fs::write(d.join("bad.json"), r#"{"schema_version": 1, "experiment": "nope"}"#).unwrap();
    assert_eq!(code(&run(d, &["experiment", "--config", "bad.json"])), 2);
}

#[test]
fn non_convergence_exits_with_three_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--problem", "signed", "--n", "20", "--k", "2", "--seed", "1", "--out", "s"]);
    std::fs::write(d.join("tight.json"), r#"{"schema_version": 1, "pierra": {"max_iters": 1}}"#).unwrap();
    let out = run(d, &["solve", "--problem", "signed", "--config", "tight.json", "--in", "s", "--out", "sol"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(d.join("sol.report.json")).unwrap()).unwrap();
    assert_eq!(report["iterations"], 1);
}

#[test]
fn signed_pipeline_recovers_clean_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let files = ok(d, &["generate", "--problem", "signed", "--n", "24", "--k", "3", "--p", "1", "--q", "0", "--delta", "1", "--out", "s"]);
    assert!(files.lines().count() >= 4, "{files}");
    ok(d, &["solve", "--problem", "signed", "--in", "s", "--out", "sol"]);
    ok(d, &["round", "--in", "s", "--solution", "sol", "--out", "est.json"]);
    let eval: Value = serde_json::from_str(&ok(d, &["evaluate", "--in", "s", "--estimate", "est.json", "--solution", "sol"])).unwrap();
    assert_eq!(eval["estimate"]["ari"], 1.0);
    assert_eq!(eval["estimate"]["error_rate"], 0.0);
    assert_eq!(eval["solution"]["converged"], true);
    assert!(eval["solution"]["distance_to_oracle"].as_f64().unwrap() < 1e-3);

    let raw: Value = serde_json::from_str(&ok(d, &["cluster", "--in", "s", "--algorithm", "lbar_rw"])).unwrap();
    assert_eq!(raw["algorithm"], "lbar_rw");
    assert_eq!(raw["assignment"].as_array().unwrap().len(), 24);
}

#[test]
fn maxcut_round_reports_a_cut_on_the_full_graph() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["generate", "--problem", "maxcut", "--n", "20", "--eta", "0", "--delta", "1", "--out", "m"]);
    ok(d, &["solve", "--problem", "maxcut", "--solver", "bm", "--in", "m", "--out", "sol"]);
    ok(d, &["round", "--in", "m", "--solution", "sol", "--samples", "30", "--out", "cut.json"]);
    let eval: Value = serde_json::from_str(&ok(d, &["evaluate", "--in", "m", "--estimate", "cut.json"])).unwrap();
    assert_eq!(eval["estimate"]["cut_full"], 100.0);
    assert_eq!(eval["estimate"]["ari"], 1.0);
}

#[test]
fn fixed_point_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["fixed-point", "--problem", "signed", "--n", "6", "--n-mc", "6", "--r-grid", "1,4", "--localization", "l2"];
    let out = run(dir.path(), &args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,quantile,n_effective"));
    assert_eq!(lines.count(), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("r_hat"));
}

#[test]
fn gset_synth_and_info_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gset", "synth", "--n", "50", "--degree", "4", "--seed", "3", "--out", "g.txt"]);
    let info: Value = serde_json::from_str(&ok(d, &["gset", "info", "--in", "g.txt"])).unwrap();
    assert_eq!(info["n"], 50);
    let m = info["m"].as_f64().unwrap();
    assert_eq!(info["average_degree"].as_f64().unwrap(), 2.0 * m / 50.0);
    let sweep = ok(d, &["gset", "sweep", "--in", "g.txt", "--delta", "1", "--replicates", "1", "--samples", "10"]);
    assert!(sweep.starts_with("cell,"), "{sweep}");
}
