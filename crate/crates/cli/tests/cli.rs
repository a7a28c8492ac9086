//! End-to-end checks of the command-line interface: values, formats,
//! config resolution and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twisted-eig"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("TWISTED_EIG_CONFIG").output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON report")
}

#[test]
fn ball_reports_pi_in_3d() {
    let out = run(&["ball", "--p", "2", "--q", "2", "--dim", "3", "--radius", "1"]);
    let report = stdout_json(&out);
    let lambda = report["result"]["lambda"].as_f64().unwrap();
    assert!((lambda - std::f64::consts::PI).abs() / lambda < 1e-6);
    assert_eq!(report["flags"]["all_pass"], serde_json::Value::Bool(true));
    // schema: fixed top-level keys
    for key in ["inputs", "result", "residuals", "flags", "timing_ms"] {
        assert!(report.get(key).is_some(), "missing key {key}");
    }
    // residual rows carry value/tolerance/pass
    let energy = &report["residuals"]["energy_identity"];
    assert!(energy["value"].is_number());
    assert!(energy["tolerance"].is_number());
    assert!(energy["pass"].is_boolean());
}

#[test]
fn ball_reports_bessel_zero_in_2d() {
    let out = run(&["ball", "--p", "2", "--q", "2", "--dim", "2", "--radius", "1"]);
    let report = stdout_json(&out);
    let lambda = report["result"]["lambda"].as_f64().unwrap();
    assert!((lambda - 2.40482556).abs() < 1e-6);
}

#[test]
fn invalid_parameters_exit_2() {
    let out = run(&["ball", "--p", "2", "--q", "7", "--dim", "3", "--radius", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["ball", "--p", "0.5", "--q", "2", "--dim", "2"]);
    assert_eq!(out.status.code(), Some(2));
    // clap usage errors share the code
    let out = run(&["ball", "--bogus-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3() {
    // far beyond the one-sign-per-ball existence fold
    let out = run(&["twisted", "--p", "2", "--q", "2", "--dim", "2", "--r1", "0.08", "--r2", "0.99"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn twisted_equal_pair_value_and_flags() {
    let out = run(&[
        "twisted", "--p", "2", "--q", "2", "--dim", "2", "--r1", "0.70710678", "--r2", "0.70710678",
    ]);
    let report = stdout_json(&out);
    let lambda = report["result"]["lambda"].as_f64().unwrap();
    assert!((lambda - 3.40092).abs() < 1e-3);
    let m = report["result"]["m"].as_f64().unwrap();
    assert!(m.abs() < 1e-8);
    assert_eq!(report["flags"]["zero_multiplier"], serde_json::Value::Bool(true));
    let flux = &report["residuals"]["flux_equality"];
    assert!(flux["pass"].as_bool().unwrap());
}

#[test]
fn twisted_method_both_reports_oracle_gap() {
    let out = run(&[
        "twisted", "--p", "2", "--q", "2", "--dim", "2", "--r1", "0.7", "--r2", "0.7",
        "--method", "both", "--grid", "256",
    ]);
    let report = stdout_json(&out);
    assert!(report["residuals"]["oracle_gap"]["pass"].as_bool().unwrap());
    assert!(report["result"]["lambda_direct"].is_number());
}

#[test]
fn sweep_csv_schema() {
    let out = run(&["sweep", "--p", "2", "--q", "2", "--dim", "2", "--steps", "8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "R1,R2,lambda,f1,f2,m,status");
    let data_rows: Vec<&str> = lines[1..].iter().filter(|l| !l.starts_with('#')).copied().collect();
    assert_eq!(data_rows.len(), 8);
    for row in &data_rows {
        assert_eq!(row.split(',').count(), 7, "row: {row}");
    }
    // appended summary line with the refined split
    assert!(lines.last().unwrap().starts_with("# optimum:"), "missing summary line");
}

#[test]
fn wirtinger_linear_value() {
    let out = run(&["wirtinger", "--p", "2", "--q", "2"]);
    let report = stdout_json(&out);
    let lambda = report["result"]["lambda"].as_f64().unwrap();
    assert!((lambda - std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn curve_shapes() {
    let out = run(&["curve", "--p", "2", "--shape", "circle"]);
    let report = stdout_json(&out);
    assert!(report["result"]["defect"].as_f64().unwrap().abs() < 1e-5);
    let out = run(&["curve", "--p", "2", "--shape", "ellipse", "--a", "1", "--b", "2"]);
    let report = stdout_json(&out);
    assert!(report["result"]["defect"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_single_suite_passes() {
    let out = run(&["verify", "--suite", "pohozaev", "--p", "2", "--q", "3", "--dim", "3"]);
    let report = stdout_json(&out);
    assert_eq!(report["flags"]["all_pass"], serde_json::Value::Bool(true));
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = std::env::temp_dir().join(format!("twisted-eig-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config_path: PathBuf = dir.join("config.json");
    std::fs::write(&config_path, r#"{ "p": 2.0, "q": 2.0, "dim": 3 }"#).unwrap();
    // config via flag
    let out = bin()
        .args(["ball", "--radius", "1", "--config", config_path.to_str().unwrap()])
        .env_remove("TWISTED_EIG_CONFIG")
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert!((report["result"]["lambda"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-6);
    // config via environment variable
    let out = bin()
        .args(["ball", "--radius", "1"])
        .env("TWISTED_EIG_CONFIG", &config_path)
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert!((report["result"]["lambda"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-6);
    // command-line flag beats the file
    let out = bin()
        .args(["ball", "--radius", "1", "--dim", "2", "--config", config_path.to_str().unwrap()])
        .env_remove("TWISTED_EIG_CONFIG")
        .output()
        .unwrap();
    let report = stdout_json(&out);
    assert!((report["result"]["lambda"].as_f64().unwrap() - 2.40482556).abs() < 1e-6);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn csv_output_for_single_reports() {
    let out = run(&["ball", "--p", "2", "--q", "2", "--dim", "3", "--out", "csv", "--no-timing"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("key,value"));
    assert!(text.lines().any(|l| l.starts_with("result.lambda,")));
}
