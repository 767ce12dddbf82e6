use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collatz-lab"))
        .args(args)
        .env_remove("COLLATZ_LAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

/// Drops the wall-clock field so runs can be compared.
fn without_elapsed(mut v: Value) -> Value {
    if let Some(r) = v.get_mut("report").and_then(Value::as_object_mut) {
        r.remove("elapsed");
    }
    v
}

#[test]
fn trajectory_of_27() {
    let out = lab(&["trajectory", "27"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("27, 41, 62, 31, 47"));
    assert!(text.contains("steps: 70"));
    assert!(text.contains("peak: 4616"));
}

#[test]
fn trajectory_small_cases() {
    let out = lab(&["trajectory", "2"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("2, 1\n"));
    assert!(stdout(&out).contains("steps: 1"));

    let out = lab(&["trajectory", "5", "--reduced"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("5, 8, 2\nrules: Q3 Q1\n"));
}

#[test]
fn trajectory_rejects_bad_input() {
    assert_eq!(code(&lab(&["trajectory", "0"])), 2);
    assert_eq!(code(&lab(&["trajectory", "4", "--reduced"])), 2);
    assert_eq!(code(&lab(&["trajectory", "abc"])), 2);
    // Target not reached within the budget.
    assert_eq!(code(&lab(&["trajectory", "27", "--budget", "10"])), 1);
}

#[test]
fn trajectory_json() {
    let v = json(&lab(&["trajectory", "27", "--json"]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["steps"], 70);
    assert_eq!(v["peak"], 4616);
    assert_eq!(v["values"][1], 41);
}

#[test]
fn verify_range_single_value() {
    let out = lab(&["verify-range", "27", "27", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["stats"]["max_steps"], 70);
    assert_eq!(v["stats"]["max_peak"], 4616);
    assert_eq!(v["complete"], true);
}

#[test]
fn verify_range_human_output() {
    let out = lab(&["verify-range", "1", "1000"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("verify-range [1, 1000]: all converge\n"));
    assert!(text.contains("checked: 1000"));
    // 871 has the longest orbit below 1000.
    assert!(text.contains("at 871"));
}

#[test]
fn verify_range_is_independent_of_workers() {
    let args = ["verify-range", "1", "200000", "--chunk-size", "4096", "--json"];
    let one = without_elapsed(json(&lab(&[&args[..], &["--workers", "1"]].concat())));
    let four = without_elapsed(json(&lab(&[&args[..], &["--workers", "4"]].concat())));
    assert_eq!(one, four);
}

#[test]
fn workers_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_collatz-lab"))
        .args(["verify-range", "1", "100"])
        .env("COLLATZ_LAB_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2, "zero workers from the environment must be rejected");
    let out = Command::new(env!("CARGO_BIN_EXE_collatz-lab"))
        .args(["verify-range", "1", "100"])
        .env("COLLATZ_LAB_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

fn checkpoint_arg(p: &Path) -> String {
    p.to_str().unwrap().to_owned()
}

#[test]
fn verify_range_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cp = checkpoint_arg(&dir.path().join("cp.json"));
    let base = ["verify-range", "1", "100000", "--chunk-size", "5000", "--json"];

    let full = without_elapsed(json(&lab(&base)));

    let partial = lab(&[&base[..], &["--checkpoint", &cp, "--max-chunks", "7"]].concat());
    assert_eq!(code(&partial), 0);
    assert_eq!(json(&partial)["complete"], false);

    let resumed = lab(&[&base[..], &["--checkpoint", &cp, "--resume", "--workers", "3"]].concat());
    assert_eq!(code(&resumed), 0);
    let resumed = without_elapsed(json(&resumed));
    assert_eq!(resumed["stats"], full["stats"]);
    assert_eq!(resumed["complete"], true);
    assert_eq!(resumed["report"]["checked"], full["report"]["checked"]);

    let other = lab(&["verify-range", "1", "50000", "--checkpoint", &cp, "--resume"]);
    assert_eq!(code(&other), 2);
}

#[test]
fn verify_range_budget_overrun_is_a_failure() {
    let out = lab(&["verify-range", "1", "100", "--budget", "5"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("inconclusive"));
}

#[test]
fn verify_range_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let p = checkpoint_arg(&path);
    let out = lab(&["verify-range", "1", "1000", "--json", "--output", &p]);
    assert_eq!(code(&out), 0);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["report"]["checked"], 1000);

    // A failed run does not write unless forced.
    let bad = dir.path().join("bad.json");
    let b = checkpoint_arg(&bad);
    assert_eq!(code(&lab(&["verify-range", "1", "100", "--budget", "5", "--output", &b])), 1);
    assert!(!bad.exists());
    assert_eq!(code(&lab(&["verify-range", "1", "100", "--budget", "5", "--output", &b, "--force"])), 1);
    assert!(bad.exists());
}

#[test]
fn facts_suites() {
    let out = lab(&["facts", "all", "1", "20000", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    let ids: Vec<&str> = v["reports"].as_array().unwrap().iter().map(|r| r["fact_id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["predecessors", "transitions", "reduction", "small-cycles", "c0-chains"]);

    for suite in ["predecessors", "transitions", "reduction", "small-cycles", "c0-chains"] {
        assert_eq!(code(&lab(&["facts", suite, "1", "1000"])), 0, "{suite}");
    }
    assert_eq!(code(&lab(&["facts", "nonsense", "1", "10"])), 2);
    assert_eq!(code(&lab(&["facts", "all", "10", "1"])), 2);
}

#[test]
fn facts_strict_mode() {
    let lenient = lab(&["facts", "reduction", "1", "2000", "--budget", "5"]);
    assert_eq!(code(&lenient), 0);
    assert!(stdout(&lenient).contains("inconclusive"));
    assert_eq!(code(&lab(&["facts", "reduction", "1", "2000", "--budget", "5", "--strict"])), 1);
}

#[test]
fn tree_dot_and_json() {
    let out = lab(&["tree", "--reduced", "--max-value", "128", "--dot"]);
    assert_eq!(code(&out), 0);
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph collatz_reduced {\n"));
    for edge in ["8 -> 2 [label=\"Q1\"]", "26 -> 20 [label=\"Q2\"]", "5 -> 8 [label=\"Q3\"]", "128 -> 32 [label=\"Q1\"]"] {
        assert!(dot.contains(edge), "{edge}");
    }

    let v = json(&lab(&["tree", "--max-value", "24", "--json"]));
    assert_eq!(v["flavor"], "full");
    let nodes: Vec<u64> = v["nodes"].as_array().unwrap().iter().map(|n| n.as_u64().unwrap()).collect();
    for x in [3, 6, 12, 24] {
        assert!(nodes.contains(&x));
    }

    assert_eq!(code(&lab(&["tree"])), 2, "unbounded tree");
    assert_eq!(code(&lab(&["tree", "--reduced", "--root", "3", "--max-value", "10"])), 2);
    assert_eq!(code(&lab(&["tree", "--dot", "--json", "--max-depth", "2"])), 2);
}

#[test]
fn tree_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.dot");
    let out = lab(&["tree", "--max-depth", "5", "--output", &checkpoint_arg(&path)]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&out));
}

#[test]
fn cycles_search() {
    let out = lab(&["cycles", "--max-len", "12"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("k=2 R1-R2 x=2 simple"));
    let v = json(&lab(&["cycles", "--max-len", "20", "--json"]));
    assert_eq!(v["only_trivial"], true);
    assert_eq!(v["candidates"].as_array().unwrap().len(), 20);
    assert_eq!(code(&lab(&["cycles", "--max-len", "31"])), 2);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&lab(&[])), 2);
    assert_eq!(code(&lab(&["frobnicate"])), 2);
    assert_eq!(code(&lab(&["--help"])), 0);
}
