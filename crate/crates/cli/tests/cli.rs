use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn tasknet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tasknet"))
        .args(args)
        .env_remove("TASKNET_ENDPOINT")
        .env_remove("TASKNET_API_KEY")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn networks_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/resources/networks")
}

#[test]
fn gen_is_deterministic_and_answers_check() {
    let args = [
        "gen",
        "--domain",
        "bw",
        "--b",
        "4",
        "--h",
        "3",
        "--seed",
        "7",
        "--count",
        "3",
        "--with-answer",
    ];
    let a = stdout_json(&tasknet(&args));
    let b = stdout_json(&tasknet(&args));
    assert_eq!(a, b);
    let items = a.as_array().unwrap();
    assert_eq!(items.len(), 3);
    assert_eq!(items[0]["seed"], 7);
    assert_eq!(items[2]["seed"], 9);
    assert_eq!(items[0]["cell"]["b"], 4);
    assert!(items[0]["request"]
        .as_str()
        .unwrap()
        .starts_with("As initial conditions I have that:\n"));
    assert!(items[0]["answer"].is_string());
}

#[test]
fn gen_writes_instance_directories() {
    let dir = tempfile::tempdir().unwrap();
    let out = tasknet(&["gen", "-d", "rg", "--count", "2", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 2);
    let first = dir.path().join("recipe-distractors3-seed0");
    assert!(fs::read_to_string(first.join("request.txt"))
        .unwrap()
        .starts_with("Hello, I'd like to request a recipe"));
    assert!(first.join("instance.json").exists());
}

#[test]
fn oracle_run_succeeds_and_dumps_workspace() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws");
    let result_path = dir.path().join("result.json");
    let out = tasknet(&[
        "run",
        "-d",
        "um",
        "--n",
        "3",
        "--k",
        "2",
        "--seed",
        "2",
        "--oracle",
        "--out",
        result_path.to_str().unwrap(),
        "--workspace",
        ws.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result: Value = serde_json::from_str(&fs::read_to_string(&result_path).unwrap()).unwrap();
    assert_eq!(result["success"], true);
    assert_eq!(result["termination"], "verified-complete");
    assert_eq!(result["verdict"]["verdict"], "accept");
    let answer = fs::read_to_string(ws.join("answer.txt")).unwrap();
    assert_eq!(answer, result["final_answer"].as_str().unwrap());
    assert!(ws.join("files/request.txt").exists());
}

#[test]
fn scripted_run_that_loops_hits_the_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("script.json");
    let read = r#"{"observation": "", "thought": "", "action": {"name": "read", "action_arg1": "files/request.txt", "action_arg2": ""}}"#;
    fs::write(&script, serde_json::to_string(&vec![read; 100]).unwrap()).unwrap();
    let config = dir.path().join("config.toml");
    fs::write(&config, "timing = \"disabled\"\n[reward]\nhorizon = 100\n").unwrap();
    let out = tasknet(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "-d",
        "bw",
        "--script",
        script.to_str().unwrap(),
    ]);
    let result = stdout_json(&out);
    assert_eq!(result["termination"], "horizon-exceeded");
    assert_eq!(result["iterations"], 100);
    assert!((result["reward"].as_f64().unwrap() + 10.0).abs() < 1e-9);
}

#[test]
fn run_without_actor_is_an_error() {
    let out = tasknet(&["run", "-d", "bw"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no actor backend"));
}

#[test]
fn batch_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        r#"
name = "smoke"
conditions = ["human-tn", "no-tn"]
trials = 3
seed = 11
timing = "disabled"

[[cells]]
domain = "blocksworld"
b = 3
h = 2

[actor]
kind = "oracle"
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = tasknet(&[
        "batch",
        spec.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("human-tn"), "{table}");
    let result: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("result.json")).unwrap()).unwrap();
    let cells = result["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 2);
    for c in cells {
        assert_eq!(c["successes"], 3);
        assert_eq!(c["trials"], 3);
    }
    assert_eq!(fs::read_dir(out_dir.join("episodes")).unwrap().count(), 6);
    assert!(out_dir.join("success.svg").exists());

    let report_dir = dir.path().join("report");
    let out = tasknet(&[
        "report",
        out_dir.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        report_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(report_dir.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(!report_dir.join("success.svg").exists());
}

#[test]
fn endpoint_override_reaches_http_backends_only() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    fs::write(
        &config,
        r#"
[generator]
kind = "http-chat"
endpoint = "http://example.invalid/v1/chat/completions"
model = "m"
retries = 0
timeout_secs = 2
"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tasknet"))
        .args([
            "make-tn",
            "--config",
            config.to_str().unwrap(),
            "-d",
            "bw",
            "--retries",
            "0",
        ])
        .env("TASKNET_ENDPOINT", "http://127.0.0.1:9/v1/chat/completions")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("127.0.0.1"), "{stderr}");
}

#[test]
fn make_tn_with_scripted_generator() {
    let dir = tempfile::tempdir().unwrap();
    let library = fs::read_to_string(networks_dir().join("blocksworld.json")).unwrap();
    let config = dir.path().join("config.toml");
    let cfg = format!(
        "[generator]\nkind = \"scripted\"\nresponses = [\"not json at all\", {}]\n",
        toml::Value::String(format!("Here is the network:\n{library}"))
    );
    fs::write(&config, cfg).unwrap();
    let lib_path = dir.path().join("lib.json");
    let out = tasknet(&[
        "make-tn",
        "--config",
        config.to_str().unwrap(),
        "-d",
        "bw",
        "--out",
        lib_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("after 2 attempt"));
    let out = tasknet(&["validate-tn", lib_path.to_str().unwrap()]);
    let report = stdout_json(&out);
    assert_eq!(report["methods"], 5);
}

#[test]
fn validate_tn_bundled_and_cyclic() {
    for name in [
        "blocksworld.json",
        "unit_movement.json",
        "recipe.json",
        "llm_blocksworld.json",
        "llm_unit_movement.json",
    ] {
        let out = tasknet(&["validate-tn", networks_dir().join(name).to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stdout));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cyclic.json");
    fs::write(
        &path,
        r#"{
  "method1": {"task": "a", "subtasks": {"subtask1": "b"}, "effect": "x", "effect_files": {"file1": "answer.txt"}},
  "method2": {"task": "b", "subtasks": {"subtask1": "a"}, "effect": "y", "effect_files": {"file1": "answer.txt"}}
}"#,
    )
    .unwrap();
    let out = tasknet(&["validate-tn", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["report"]["cycles"][0], serde_json::json!(["a", "b"]));
}
