use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn dapsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dapsim")).args(args).output().unwrap()
}

const SAMPLE: &str = r#"
[model]
lambda = 0.5
radius = 0.5
law = "ball"
potential = "free"

[experiment]
kind = "sample"
windows = [4.0]
replicates = 2
seed = 1
"#;

#[test]
fn sample_prints_json_record() {
    let config = scratch("cli_sample.toml", SAMPLE);
    let out = dapsim(&["sample", "--config", config.to_str().unwrap(), "--seed", "42", "--replicates", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let record: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(record["config"]["seed"], 42);
    assert_eq!(record["payload"]["windows"][0]["counts"].as_array().unwrap().len(), 4);
}

#[test]
fn repeated_runs_match() {
    let config = scratch("cli_repeat.toml", SAMPLE);
    let path = config.to_str().unwrap();
    let strip = |o: Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_s");
        v
    };
    assert_eq!(strip(dapsim(&["sample", "--config", path])), strip(dapsim(&["sample", "--config", path])));
}

#[test]
fn csv_goes_to_file() {
    let config = scratch("cli_csv.toml", SAMPLE);
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli_out.csv");
    let out = dapsim(&[
        "sample",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        target.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.starts_with("# dapsim "));
    assert!(text.lines().any(|l| l == "n,replicate,count"));
}

#[test]
fn typo_is_reported_with_suggestion() {
    let config = scratch("cli_typo.toml", &SAMPLE.replace("lambda = 0.5", "lamda = 0.5"));
    let out = dapsim(&["sample", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lamda") && err.contains("lambda"), "{err}");
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn negative_lambda_names_the_field() {
    let config = scratch("cli_negative.toml", &SAMPLE.replace("lambda = 0.5", "lambda = -1"));
    let out = dapsim(&["sample", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));
}

#[test]
fn subcommand_must_match_config() {
    let config = scratch("cli_mismatch.toml", SAMPLE);
    let out = dapsim(&["percolate", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sample experiment"));
}

#[test]
fn missing_config_file_fails() {
    let out = dapsim(&["sample", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degenerate_statistic_warns_but_succeeds() {
    let text = r#"
[model]
lambda = 0.15
law = "segment"
orientation = "axis"
potential = "facet"
a2 = 1.0

[ustat]
kernel = "zero"

[experiment]
kind = "ustat-clt"
windows = [4.0, 9.0]
replicates = 5
"#;
    let config = scratch("cli_zero.toml", text);
    let out = dapsim(&["ustat-clt", "--config", config.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: statistic has zero variance"));
}
