use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use familiar_core::config::DEFAULT_CONFIG;
use familiar_core::session::{compute_metrics, import_ndjson};
use familiar_core::Config;
use serde_json::Value;

const GOLDEN: &str = include_str!("../../core/data/golden_script.ndjson");

fn familiar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_familiar")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let last = text.lines().last().expect("stderr has a line");
    serde_json::from_str(last).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

#[test]
fn validate_accepts_the_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", DEFAULT_CONFIG);
    let out = familiar(&["validate", "--config", arg(&config)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stderr.is_empty());
}

#[test]
fn validate_reports_every_error_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: Value = serde_json::from_str(DEFAULT_CONFIG).unwrap();
    doc["apartment"]["tau"] = (-1.0).into();
    doc["apartment"]["speed"] = 0.0.into();
    doc["protocols"][0]["behaviors"][1]["predecessors"] = serde_json::json!(["no_such_behavior"]);
    let config = write(dir.path(), "c.json", &doc.to_string());
    let out = familiar(&["validate", "--config", arg(&config)]);
    assert_eq!(out.status.code(), Some(1));
    let errors = stderr_json(&out);
    let errors = errors.as_array().expect("array of errors");
    assert!(errors.len() >= 3, "{errors:?}");
    for e in errors {
        assert!(e["path"].is_string() && e["code"].is_string() && e["message"].is_string(), "{e}");
    }
    let paths: Vec<&str> = errors.iter().map(|e| e["path"].as_str().unwrap()).collect();
    assert!(paths.contains(&"/apartment/tau"), "{paths:?}");
    assert!(paths.iter().any(|p| p.starts_with("/protocols/0/behaviors/1/predecessors")), "{paths:?}");
}

#[test]
fn validate_rejects_syntax_errors_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", "{ not json");
    let out = familiar(&["validate", "--config", arg(&config)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)[0]["code"], "SyntaxError");

    let missing = dir.path().join("absent.json");
    let out = familiar(&["validate", "--config", arg(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)[0]["code"], "IoError");
}

#[test]
fn run_writes_metrics_and_a_log_that_reproduces_them() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", DEFAULT_CONFIG);
    let script = write(dir.path(), "s.ndjson", GOLDEN);
    let metrics = dir.path().join("metrics.json");
    let log = dir.path().join("log.ndjson");
    let out = familiar(&[
        "run", "--config", arg(&config), "--script", arg(&script), "--out", arg(&metrics), "--log", arg(&log),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let m: Value = serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(m["success"], true);
    assert_eq!(m["regions_taught"], 3);
    assert_eq!(m["wrong_commands"], 0);
    assert_eq!(m["out_of_sight_events"], 0);
    assert!(m["duration_s"].as_f64().unwrap() <= 1800.0);

    let records = import_ndjson(&std::fs::read_to_string(&log).unwrap()).unwrap();
    let recomputed = compute_metrics(&records, &Config::default_scenario()).unwrap();
    assert_eq!(serde_json::to_value(&recomputed).unwrap(), m);
}

#[test]
fn run_with_dynamic_viz_off_keeps_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", DEFAULT_CONFIG);
    let script = write(dir.path(), "s.ndjson", GOLDEN);
    let on = dir.path().join("on.json");
    let off = dir.path().join("off.json");
    let base = ["run", "--config", arg(&config), "--script", arg(&script), "--out"];
    assert!(familiar(&[&base[..], &[arg(&on)]].concat()).status.success());
    assert!(familiar(&[&base[..], &[arg(&off), "--dynamic-viz", "off", "--visual-programming", "off"]].concat())
        .status
        .success());
    assert_eq!(std::fs::read_to_string(on).unwrap(), std::fs::read_to_string(off).unwrap());
}

#[test]
fn run_reports_script_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", DEFAULT_CONFIG);
    let script = write(dir.path(), "s.ndjson", "{\"tick\":5,\"type\":\"reset\"}\n{\"tick\":2,\"type\":\"reset\"}\n");
    let metrics = dir.path().join("metrics.json");
    let out = familiar(&["run", "--config", arg(&config), "--script", arg(&script), "--out", arg(&metrics)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)[0]["message"].as_str().unwrap().contains("line 2"));
    assert!(!metrics.exists());
}

#[test]
fn stdio_session_answers_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", DEFAULT_CONFIG);
    let log = dir.path().join("session.ndjson");
    let mut child = Command::new(env!("CARGO_BIN_EXE_familiar"))
        .args(["serve", "--stdio", "--config", arg(&config), "--log", arg(&log)])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    stdin
        .write_all(b"{\"type\":\"chat\",\"text\":\"learn the region kitchen\"}\nnot json\n{\"type\":\"fly\"}\n{\"type\":\"move_avatar\",\"x\":-5,\"y\":1}\n")
        .unwrap();
    drop(stdin);
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());

    let messages: Vec<Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    // Ticks may interleave events; the direct replies keep their order.
    let replies: Vec<&Value> =
        messages.iter().filter(|m| !matches!(m["type"].as_str(), Some("event" | "robot_say" | "notice"))).collect();
    let types: Vec<&str> = replies.iter().map(|m| m["type"].as_str().unwrap()).collect();
    assert_eq!(types, ["snapshot", "chat_ack", "protocol_error", "protocol_error", "move_rejected"]);
    assert_eq!(replies[1]["intent"], "teach_region");
    assert_eq!(replies[4]["reason"], "out_of_bounds");
    let seqs: Vec<u64> = messages.iter().map(|m| m["seq"].as_u64().unwrap()).collect();
    assert!(seqs.windows(2).all(|w| w[0] < w[1]), "{seqs:?}");
    assert!(import_ndjson(&std::fs::read_to_string(log).unwrap()).unwrap().len() >= messages.len());
}

#[test]
fn serve_requires_a_port_or_stdio() {
    let out = familiar(&["serve", "--config", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = familiar(&["serve", "--config", "x.json", "--port", "1", "--max-sessions", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
