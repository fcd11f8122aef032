use std::path::PathBuf;
use std::process::Command;

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn lorot(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lorot")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn flat_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout) = lorot(&["run", "--config", config("flat_tcd0.json").to_str().unwrap(), "--out", out]);
    assert_eq!(code, 0, "{stdout}");
    for name in ["tcd_reduced", "tcd_full", "tmcp_reduced", "midpoint", "good_geodesic", "brunn_minkowski"] {
        assert!(dir.path().join(format!("{name}.report.json")).exists(), "{name}");
        assert!(dir.path().join(format!("{name}.csv")).exists(), "{name}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 0);
    assert_eq!(summary["pass"], true);
}

#[test]
fn subcommands_filter_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout) = lorot(&["check-tmcp", "--config", config("flat_tcd0.json").to_str().unwrap(), "--out", out]);
    assert_eq!(code, 0);
    assert_eq!(stdout.lines().count(), 1, "{stdout}");
    assert!(dir.path().join("tmcp_reduced.report.json").exists());
    assert!(!dir.path().join("tcd_full.report.json").exists());
}

#[test]
fn positive_curvature_on_a_flat_window_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout) =
        lorot(&["run", "--config", config("bonnet_myers_positive.json").to_str().unwrap(), "--out", out]);
    assert_eq!(code, 2, "{stdout}");
    assert!(stdout.starts_with("FAIL"));
}

#[test]
fn bad_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema": 1, "space": {"bounds": [[0, 1], [0, 1]], "resolution": [4, 4]}, "checks": [], "bogus": 1}"#).unwrap();
    assert_eq!(lorot(&["run", "--config", bad.to_str().unwrap()]).0, 1);
    assert_eq!(lorot(&["frobnicate"]).0, 1);
    assert_eq!(lorot(&["coeffs", "--K", "0", "--N", "0.5", "--t", "0.5", "--theta", "1"]).0, 1);
}

#[test]
fn coeffs_prints_value() {
    let (code, stdout) = lorot(&["coeffs", "--K", "0", "--N", "3", "--t", "0.3", "--theta", "7"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "0.3");
    let (code, stdout) = lorot(&["coeffs", "--K", "10", "--N", "1", "--t", "0.5", "--theta", "1"]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "+inf");
}

#[test]
fn flag_driven_commands() {
    let (code, stdout) = lorot(&["bishop-gromov", "--T", "4", "--r", "1", "--R", "2", "--K", "0", "--N", "2"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("volume_ratio 0.39"), "{stdout}");
    let (code, stdout) = lorot(&["brunn-minkowski", "--side1", "2"]);
    assert_eq!(code, 0, "{stdout}");
    let (code, stdout) = lorot(&["smooth-verify", "--K", "-1", "--Nprime", "3", "--trials", "5"]);
    assert_eq!(code, 0, "{stdout}");
}

#[test]
fn transport_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("problem.json");
    std::fs::write(
        &problem,
        r#"{"mu0": [{"at": [0, 0], "weight": 1}], "mu1": [{"at": [5, 3], "weight": 1}], "p": 0.5}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let (code, stdout) =
        lorot(&["transport", "--config", problem.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("objective 4"), "{stdout}");
    assert!(out.join("coupling.csv").exists());
}
