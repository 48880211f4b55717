//! End-to-end tests of the `mopp` binary: subcommands, flag overrides, exit
//! codes, artifact layout, and byte-determinism of emitted files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const GOLDEN_CONFIG: &str = "problem=paper_example\nvariant=SPP\nx0=-1,3\nz=1,1\nalpha=const:1\nstep_tol=0.0001\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mopp"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mopp_cli_test_{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn run_writes_artifacts_and_reports_the_outcome() {
    let dir = scratch("run_golden");
    let cfg = write_config(&dir, GOLDEN_CONFIG);
    let out_dir = dir.join("artifacts");
    let output = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));
    let text = stdout_of(&output);
    assert!(text.contains("termination: step_tol"), "{text}");
    assert!(text.contains("problem: paper_example"), "{text}");

    let csv = std::fs::read_to_string(out_dir.join("iterations.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,inner_iters,x,step_norm,scalarized,F1,F2");
    // the first step reproduces the reference trajectory at five decimals
    let row1: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(row1[2], "0.17128;2.41010");
    assert_eq!(row1[4], "1.30959");

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(json["termination"], "step_tol");
    assert_eq!(json["problem"], "paper_example");
}

#[test]
fn flags_override_the_config_file() {
    let dir = scratch("run_override");
    let cfg = write_config(&dir, GOLDEN_CONFIG);
    let out_dir = dir.join("artifacts");
    let output = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--x0")
        .arg("1,2")
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));
    let text = stdout_of(&output);
    // (1,2) is already critical, so the overridden start ends the run at once
    assert!(text.contains("termination: critical_point"), "{text}");
    assert!(text.contains("after 0 steps"), "{text}");
}

#[test]
fn flags_alone_are_a_complete_configuration() {
    let dir = scratch("run_flags_only");
    let out_dir = dir.join("artifacts");
    let output = bin()
        .arg("run")
        .arg("--problem")
        .arg("paper_example")
        .arg("--x0")
        .arg("-1,3")
        .arg("--step-tol")
        .arg("0.0001")
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));
    assert!(out_dir.join("iterations.csv").exists());
}

#[test]
fn out_dir_environment_variable_wins() {
    let dir = scratch("run_env_dir");
    let cfg = write_config(&dir, GOLDEN_CONFIG);
    let flag_dir = dir.join("flag_dir");
    let env_dir = dir.join("env_dir");
    let output = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&flag_dir)
        .env("MOPP_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));
    assert!(env_dir.join("iterations.csv").exists());
    assert!(!flag_dir.exists());
}

#[test]
fn repeated_runs_emit_byte_identical_artifacts() {
    let dir = scratch("run_determinism");
    let cfg = write_config(&dir, GOLDEN_CONFIG);
    let mut bytes = Vec::new();
    for trial in ["a", "b"] {
        let out_dir = dir.join(trial);
        let output = bin()
            .arg("run")
            .arg(&cfg)
            .arg("--out-dir")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));
        bytes.push((
            std::fs::read(out_dir.join("iterations.csv")).unwrap(),
            std::fs::read(out_dir.join("report.json")).unwrap(),
        ));
    }
    assert_eq!(bytes[0].0, bytes[1].0, "CSV bytes differ between runs");
    assert_eq!(bytes[0].1, bytes[1].1, "JSON bytes differ between runs");
}

#[test]
fn unknown_config_key_exits_with_code_two_and_names_the_key() {
    let dir = scratch("run_unknown_key");
    let cfg = write_config(&dir, "problem=paper_example\nx0=-1,3\nmystery=1\n");
    let output = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("mystery"));
}

#[test]
fn negative_step_size_exits_with_code_two() {
    let dir = scratch("run_bad_alpha");
    let cfg = write_config(&dir, GOLDEN_CONFIG);
    let output = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--alpha")
        .arg("const:-1")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("alpha"));
}

#[test]
fn convex_variant_on_a_nonconvex_problem_exits_with_code_two() {
    let dir = scratch("run_bad_variant");
    let cfg = write_config(&dir, GOLDEN_CONFIG);
    let output = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--variant")
        .arg("CISPP")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_start_point_exits_with_code_two() {
    let dir = scratch("run_missing_x0");
    let cfg = write_config(&dir, "problem=paper_example\n");
    let output = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("x0"));
}

#[test]
fn sweep_writes_the_front_table() {
    let dir = scratch("sweep_front");
    let cfg = write_config(&dir, GOLDEN_CONFIG);
    let weights = dir.join("weights.txt");
    std::fs::write(&weights, "1,1\n1,3\n3,1\n").unwrap();
    let out_dir = dir.join("artifacts");
    let output = bin()
        .arg("sweep")
        .arg(&cfg)
        .arg("--weights")
        .arg(&weights)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "z,x,F1,F2,kept");
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        assert!(line.ends_with(",true") || line.ends_with(",false"), "{line}");
    }
}

#[test]
fn sweep_without_weights_file_exits_with_code_three() {
    let dir = scratch("sweep_missing_file");
    let cfg = write_config(&dir, GOLDEN_CONFIG);
    let output = bin()
        .arg("sweep")
        .arg(&cfg)
        .arg("--weights")
        .arg(dir.join("absent.txt"))
        .output()
        .unwrap();
    // a missing file surfaces as an I/O failure, not a configuration error
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn sweep_with_malformed_weights_exits_with_code_two() {
    let dir = scratch("sweep_bad_weights");
    let cfg = write_config(&dir, GOLDEN_CONFIG);
    let weights = dir.join("weights.txt");
    std::fs::write(&weights, "1,oops\n").unwrap();
    let output = bin()
        .arg("sweep")
        .arg(&cfg)
        .arg("--weights")
        .arg(&weights)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn validate_prints_a_report_and_exits_cleanly() {
    let output = bin()
        .arg("validate")
        .arg("polyhedral")
        .arg("--samples")
        .arg("500")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr_of(&output));
    let text = stdout_of(&output);
    assert!(text.contains("problem 'polyhedral'"), "{text}");
    assert!(text.contains("all checks passed"), "{text}");
}

#[test]
fn validate_rejects_an_unknown_problem_with_code_two() {
    let output = bin().arg("validate").arg("not_a_problem").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let text = stderr_of(&output);
    assert!(text.contains("unknown problem"), "{text}");
    assert!(text.contains("paper_example"), "{text}");
}
