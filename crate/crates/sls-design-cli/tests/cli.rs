//! End-to-end checks of the command-line interface: output shapes, exit
//! codes, JSON artifacts, and determinism of regenerated tables.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sls-design"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn temp_dir(name: &str) -> PathBuf {
    let dir =
        std::env::temp_dir().join(format!("sls-design-cli-test-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn table_one_is_printed_and_deterministic() {
    let first = run(&["tables", "--id", "T1"]);
    assert!(first.status.success());
    let text = stdout(&first);
    assert!(text.starts_with("t,xi\n"));
    assert!(text.contains("0.0,0.5774"));
    assert!(text.contains("0.9,0.6948"));
    assert_eq!(text.lines().count(), 11);

    let second = run(&["tables", "--id", "T1"]);
    assert_eq!(
        first.stdout, second.stdout,
        "regeneration must be byte-identical"
    );
}

#[test]
fn tables_write_files_into_out_dir() {
    let dir = temp_dir("out");
    let output = run(&[
        "tables",
        "--id",
        "T5",
        "--format",
        "json",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let path = dir.join("T5.json");
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(parsed["schema_version"], 1);
    assert_eq!(parsed["id"], "T5");
    assert_eq!(parsed["rows"].as_array().unwrap().len(), 3);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn tables_honor_the_out_dir_env_var() {
    let dir = temp_dir("env");
    let output = bin()
        .args(["tables", "--id", "T1"])
        .env("SLS_DESIGN_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(dir.join("T1.csv").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn solve_prints_class_masses_and_writes_json() {
    let dir = temp_dir("solve");
    let json_path = dir.join("run.json");
    let output = run(&[
        "solve",
        "--q",
        "3",
        "--t",
        "0.9",
        "--criterion",
        "D",
        "--json",
        json_path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("converged"));
    assert!(text.contains("0.1667 0.1111 0.1667"), "{text}");

    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(parsed["schema_version"], 1);
    assert_eq!(parsed["result"]["converged"], true);
    assert_eq!(
        parsed["result"]["measure"]["masses"]
            .as_array()
            .unwrap()
            .len(),
        7
    );
    assert_eq!(
        parsed["result"]["measure"]["class_masses"]
            .as_array()
            .unwrap()
            .len(),
        3
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn solve_reproduces_a_reference_row() {
    let output = run(&["solve", "--q", "6", "--t", "0.9", "--criterion", "A"]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(
        text.contains("0.0006 0.0074 0.0240 0.0241 0.0073 0.0005"),
        "{text}"
    );
}

#[test]
fn starved_solve_reports_nonconvergence_with_status_one() {
    let output = run(&[
        "solve",
        "--q",
        "4",
        "--t",
        "0.9",
        "--criterion",
        "D",
        "--max-iter",
        "3",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout(&output).contains("NOT converged"));
}

#[test]
fn verify_reports_both_criteria() {
    let output = run(&[
        "verify",
        "--q",
        "5",
        "--t",
        "0.5",
        "--measure",
        "odd-central",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("optimal (D) gap="), "{text}");
    assert!(text.contains("optimal (A) gap="), "{text}");
    assert!(!text.contains("not optimal"), "{text}");
}

#[test]
fn verify_flags_suboptimality_beyond_the_threshold() {
    // t = 0.9 exceeds t1(4) = 5/6, so the even-pair family loses D-optimality.
    let output = run(&[
        "verify",
        "--q",
        "4",
        "--t",
        "0.9",
        "--measure",
        "even-pair",
        "--criterion",
        "D",
    ]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("not optimal (D)"));
}

#[test]
fn analytic_emits_masses_and_thresholds() {
    let output = run(&["analytic", "--kind", "even-central", "--q", "4"]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("0.0000 0.1667 0.0000 0.0000"), "{text}");
    assert!(text.contains("t1=0.8333"), "{text}");

    // The two-factor A measure needs t.
    let missing = run(&["analytic", "--kind", "two-factor-a", "--q", "2"]);
    assert_eq!(missing.status.code(), Some(1));
    let with_t = run(&[
        "analytic",
        "--kind",
        "two-factor-a",
        "--q",
        "2",
        "--t",
        "0.0",
    ]);
    assert!(with_t.status.success());
    assert!(stdout(&with_t).contains("0.4226"));
}

#[test]
fn reduce_support_prints_the_ledger() {
    let output = run(&["reduce-support", "--q", "6"]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("b=10, r=5, k=3, lambda=2"), "{text}");
    assert!(text.contains("10 points vs 20"), "{text}");
    assert!(text.contains("incidence:"), "{text}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["solve", "--q", "4"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        run(&["solve", "--q", "4", "--t", "0.5", "--criterion", "X"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn computational_errors_exit_with_one() {
    // q above the enumeration cap.
    let output = run(&["solve", "--q", "25", "--t", "0.5", "--criterion", "D"]);
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("error:"), "{err}");
    // t outside [0, 1).
    let output = run(&["solve", "--q", "4", "--t", "1.5", "--criterion", "D"]);
    assert_eq!(output.status.code(), Some(1));
}
