use std::path::Path;
use std::process::{Command, Output};

fn ngrambag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ngrambag")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A tiny config next to a synthetic corpus in `dir`.
fn tiny_config(dir: &Path) -> String {
    let data = dir.join("pairs.tsv");
    let synth = ngrambag(&["synth", "--count", "150", "--seed", "5", "--output", data.to_str().unwrap()]);
    assert!(synth.status.success(), "{}", stderr(&synth));
    let mut v: serde_json::Value = serde_json::from_str(include_str!("../../../configs/desk.json")).unwrap();
    v["data"]["path"] = "pairs.tsv".into();
    v["data"]["train_cap"] = 90.into();
    v["data"]["test_cap"] = 30.into();
    v["model"]["variants"] = serde_json::json!(["bag1", "bag2"]);
    v["model"]["embedding_dim"] = 8.into();
    v["model"]["hidden"] = 8.into();
    v["model"]["epochs"] = 3.into();
    v["probes"]["epochs"] = 1.into();
    v["probes"]["control_variants"] = serde_json::json!([]);
    v["output_dir"] = "run".into();
    let path = dir.join("tiny.json");
    std::fs::write(&path, v.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    assert!(ngrambag(&["--help"]).status.success());
    assert!(ngrambag(&["--version"]).status.success());
}

#[test]
fn usage_errors_exit_one() {
    let o = ngrambag(&["train"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--config"));
    assert_eq!(ngrambag(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn missing_config_exits_one_with_message() {
    let o = ngrambag(&["prepare", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/config.json"));
}

#[test]
fn missing_input_file_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    std::fs::remove_file(dir.path().join("pairs.tsv")).unwrap();
    let o = ngrambag(&["prepare", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pairs.tsv"), "{}", stderr(&o));
}

#[test]
fn training_before_prepare_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let o = ngrambag(&["train", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("prepare"));
}

#[test]
fn unconfigured_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let o = ngrambag(&["train", "--config", &cfg, "--model", "bag4"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ngrambag(&["train", "--config", &cfg, "--model", "bag9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn step_by_step_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let run = dir.path().join("run");

    let o = ngrambag(&["prepare", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let diag: serde_json::Value =
        serde_json::from_slice(&std::fs::read(run.join("data/diagnostics.json")).unwrap()).unwrap();
    assert!(diag.get("duplicates_removed").is_some());

    let o = ngrambag(&["train", "--config", &cfg, "--jobs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let log = std::fs::read_to_string(run.join("models/bag2/train_log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 3);
    for line in log.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }

    // An explicit checkpoint must match the model's vocabulary.
    let ckpt = run.join("models/bag1/checkpoint.bin");
    let copy = dir.path().join("bag1.bin");
    std::fs::copy(&ckpt, &copy).unwrap();
    let o = ngrambag(&["eval", "--config", &cfg, "--model", "bag1", "--checkpoint", copy.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = ngrambag(&["eval", "--config", &cfg, "--model", "bag2", "--checkpoint", copy.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = ngrambag(&["eval", "--config", &cfg, "--checkpoint", copy.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = ngrambag(&["eval", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(run.join("models/bag2/bleu.csv").exists() && run.join("models/bag2/norms.json").exists());

    let o = ngrambag(&["probe", "--config", &cfg, "--model", "bag2", "--task", "length", "--task", "word_order"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(run.join("models/bag2/probes/word_order.json").exists());
    assert!(!run.join("models/bag2/probes/word_content.json").exists());

    let o = ngrambag(&["report", "--out", run.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(run.join("report/summary.json")).unwrap()).unwrap();
    let probes = summary["probes"].as_array().unwrap();
    let find = |task: &str, model: &str| {
        probes.iter().find(|p| p["task"] == task && p["model"] == model).unwrap()["overall"].clone()
    };
    assert!(find("word_order", "bag2").is_number());
    assert!(find("word_content", "bag2").is_null());
    assert!(find("length", "bag1").is_null());

    assert_eq!(ngrambag(&["report", "--out", dir.path().to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn seed_and_out_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, seed) in [(&a, "11"), (&b, "12")] {
        let o = ngrambag(&["prepare", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", seed]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let snapshot: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("config.json")).unwrap()).unwrap();
    assert_eq!(snapshot["model"]["seed"], 11);
    assert_eq!(snapshot["probes"]["seed"], 11);
    assert_ne!(std::fs::read(a.join("data/train.txt")).unwrap(), std::fs::read(b.join("data/train.txt")).unwrap());
}

#[test]
fn one_shot_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let o = ngrambag(&["run", "--config", &cfg, "--jobs", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.trim_end().ends_with("summary.json"));
    let csv = std::fs::read_to_string(dir.path().join("run/report/probes.csv")).unwrap();
    assert_eq!(csv.lines().count(), 25);
}
