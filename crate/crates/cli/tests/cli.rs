//! End-to-end checks of the `sparsetrig` binary: each subcommand is run as
//! a child process and its stdout/exit code inspected.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn sparsetrig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsetrig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn scratch_dir(label: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sparsetrig-cli-{label}-{}", std::process::id()));
    fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

#[test]
fn recover_prints_solver_result_json() {
    let output = sparsetrig(&[
        "recover", "--gamma", "32", "--n", "20", "--m", "2", "--sigma", "0.1", "--method", "omp",
        "--seed", "5",
    ]);
    let value = stdout_json(&output);
    assert_eq!(value["iterations"], 2);
    assert_eq!(value["support_order"].as_array().unwrap().len(), 2);
    assert!(value["residual_norm"].as_f64().unwrap() >= 0.0);

    let output = sparsetrig(&[
        "recover", "--gamma", "32", "--n", "20", "--m", "2", "--sigma", "0.1", "--method", "bpdn",
        "--seed", "5",
    ]);
    let value = stdout_json(&output);
    assert_eq!(value["converged"], true);
    assert_eq!(value["coefficients"].as_array().unwrap().len(), 32);
}

#[test]
fn recover_rejects_stop_at_sigma_for_bpdn() {
    let output = sparsetrig(&[
        "recover",
        "--gamma",
        "32",
        "--n",
        "20",
        "--m",
        "2",
        "--sigma",
        "0.1",
        "--method",
        "bpdn",
        "--stop-at-sigma",
    ]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("--stop-at-sigma"));
}

#[test]
fn bounds_reports_condition_checks() {
    let output = sparsetrig(&[
        "bounds",
        "--theorem",
        "6.1",
        "--params",
        r#"{"n":3000,"m":8,"delta":0.5,"epsilon":0.1}"#,
    ]);
    let value = stdout_json(&output);
    assert_eq!(value["bound"], "6.1");
    assert_eq!(value["report"]["lhs"], 11.0);
    assert_eq!(value["report"]["holds"], true);

    // Missing parameters are a usage error, not a panic.
    let output = sparsetrig(&["bounds", "--theorem", "6.1", "--params", r#"{"n":3000}"#]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("missing required field"));
}

#[test]
fn analyze_reports_coherence() {
    let output = sparsetrig(&[
        "analyze",
        "--what",
        "coherence",
        "--gamma",
        "16",
        "--n",
        "12",
        "--seed",
        "3",
    ]);
    let value = stdout_json(&output);
    let mu = value["mu"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&mu));
}

#[test]
fn experiment_writes_deterministic_csv() {
    let dir = scratch_dir("determinism");
    let config = dir.join("exp.json");
    fs::write(
        &config,
        r#"{
            "frequencies": { "symmetric": { "width": 32 } },
            "n": 20,
            "sigma": 0.0,
            "trials": 5,
            "sweep": { "sparsity": { "values": [2] } },
            "models": ["continuous_uniform"],
            "methods": ["omp"],
            "master_seed": 11
        }"#,
    )
    .expect("write config");
    let config = config.to_str().unwrap();

    let out1 = dir.join("t1.csv");
    let out4 = dir.join("t4.csv");
    let run1 = sparsetrig(&[
        "--threads",
        "1",
        "experiment",
        "--config",
        config,
        "--out",
        out1.to_str().unwrap(),
    ]);
    assert!(run1.status.success());
    let run4 = sparsetrig(&[
        "--threads",
        "4",
        "experiment",
        "--config",
        config,
        "--out",
        out4.to_str().unwrap(),
    ]);
    assert!(run4.status.success());

    let text1 = fs::read_to_string(&out1).expect("csv");
    let text4 = fs::read_to_string(&out4).expect("csv");
    assert_eq!(text1, text4, "results must not depend on the thread count");
    assert!(text1.starts_with(
        "sweep_var,sweep_value,method,model,trials,success_rate,mean_l2_error,mean_sample_norm\n"
    ));

    // Stdout emission matches the file emission.
    let run_stdout = sparsetrig(&["experiment", "--config", config]);
    assert!(run_stdout.status.success());
    assert_eq!(String::from_utf8_lossy(&run_stdout.stdout), text1);

    fs::remove_dir_all(&dir).ok();
}

#[test]
fn experiment_fails_on_bad_config() {
    let dir = scratch_dir("bad-config");
    let config = dir.join("bad.json");
    fs::write(&config, r#"{ "unknown_field": 1 }"#).expect("write config");
    let output = sparsetrig(&["experiment", "--config", config.to_str().unwrap()]);
    assert!(!output.status.success());
    fs::remove_dir_all(&dir).ok();
}
