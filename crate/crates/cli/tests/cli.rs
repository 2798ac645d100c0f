use std::fs;
use std::path::{Path, PathBuf};

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["intimacy"];
    full.extend_from_slice(args);
    intimacy_cli::run(full)
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic").join(name)
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["no-such-command"]), 2);
    assert_eq!(run(&["score", "--judgments"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scores.csv");
    assert_eq!(run(&["score", "--judgments", "/nonexistent/j.csv", "--output", out.to_str().unwrap()]), 1);
    assert!(!out.exists());
}

#[test]
fn extract_writes_questions_and_config_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("raw.jsonl");
    fs::write(
        &input,
        concat!(
            "{\"id\":\"r1\",\"domain\":\"reddit_post\",\"text\":\"AITA for skipping my brother's wedding?\"}\n",
            "{\"id\":\"b1\",\"domain\":\"book\",\"text\":\"Why?\"}\n",
        ),
    )
    .unwrap();
    let out = dir.path().join("questions.jsonl");
    assert_eq!(run(&["extract", "--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()]), 0);
    let lines: Vec<serde_json::Value> =
        fs::read_to_string(&out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0]["text"].as_str().unwrap().starts_with("Am I the Asshole"));
    assert!(lines[0]["rejected"].is_null());
    assert!(!lines[1]["rejected"].is_null());

    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("questions.jsonl.run.json")).unwrap()).unwrap();
    assert_eq!(sidecar["command"], "extract");
}

#[test]
fn score_then_reliability_on_shipped_judgments() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    let judgments = shipped("judgments.csv");
    assert_eq!(run(&["score", "--judgments", judgments.to_str().unwrap(), "--output", scores.to_str().unwrap()]), 0);
    let mut rd = csv::Reader::from_path(&scores).unwrap();
    let values: Vec<f64> = rd.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(values.len(), 200);
    assert!(values.iter().all(|v| (-1.0..=1.0).contains(v)));
    assert!(values.contains(&-1.0) && values.contains(&1.0));

    let report = dir.path().join("reliability.json");
    let args = ["reliability", "--judgments", judgments.to_str().unwrap(), "--output", report.to_str().unwrap()];
    assert_eq!(run(&[&args[..], &["--resamples", "5"]].concat()), 0);
    assert!(report.exists());
}
