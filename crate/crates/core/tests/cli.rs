//! End-to-end tests of the `afk` binary.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn afk(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_afk"));
    cmd.args(args).env_remove("AFK_BUDGET");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    let mut child = cmd.spawn().expect("binary runs");
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

#[test]
fn fm_on_the_worked_example_is_a_lower_bound() {
    let out = afk(&["fm", "--m", "3", "--input", &data("four_by_three.json")], None, &[]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["status"], "inconclusive");
    assert_eq!(v["result"]["dimension"]["kind"], "lower_bound");
    assert_eq!(v["result"]["truncated_maps"][0], serde_json::json!([[1, 0], [0, 1], [1, 2]]));
    assert!(v["input_digest"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn kstable_exit_codes() {
    let out = afk(&["kstable", "--input", &data("two_column.json")], None, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["status"], "k_stable");
    let v = json(&afk(&["kstable", "--input", &data("constant_column.json")], None, &[]));
    assert_eq!(v["exit_code"], 0);
    assert_eq!(v["result"]["status"], "not_k_stable");
    assert_eq!(v["result"]["witness"]["k"], 1);
    assert_eq!(v["result"]["witness_replay"], "ok");
    let out = afk(&["kstable", "--input", &data("four_by_three.json")], None, &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn even_degrees_short_circuit() {
    let out = afk(&["fm", "--m", "2", "--input", &data("golden_mean.json")], None, &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["dimension"], serde_json::json!({"kind": "exact", "value": 0}));
    assert!(v["result"]["even_shortcut"].as_bool().unwrap());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [
        vec!["kstable"],
        vec!["fm-profile", "--max-m", "9"],
        vec!["telescope", "--min-dim", "4"],
        vec!["export-dot", "--degree", "3"],
    ] {
        let mut full = args.clone();
        full.extend(["--input", "-"]);
        let text = std::fs::read_to_string(data("absorbed_points.json")).unwrap();
        let a = afk(&full, Some(&text), &[]);
        let b = afk(&full, Some(&text), &[]);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stdout));
    }
}

#[test]
fn timing_is_opt_in() {
    let plain = json(&afk(&["k0q", "--input", &data("car.json")], None, &[]));
    assert!(plain.get("timing_ms").is_none());
    let timed = json(&afk(&["k0q", "--timing", "--input", &data("car.json")], None, &[]));
    assert!(timed["timing_ms"].is_number());
}

#[test]
fn budget_flag_wins_over_the_environment() {
    let two = data("two_column.json");
    let env = json(&afk(&["fm", "--m", "41", "--input", &two], None, &[("AFK_BUDGET", "10")]));
    assert_eq!(env["budget"], 10);
    assert_eq!(env["result"]["dimension"]["kind"], "budget_exceeded");
    assert_eq!(env["exit_code"], 2);
    let flag = json(&afk(&["fm", "--m", "41", "--budget", "64", "--input", &two], None, &[("AFK_BUDGET", "10")]));
    assert_eq!(flag["budget"], 64);
    assert_eq!(flag["result"]["dimension"], serde_json::json!({"kind": "exact", "value": 2}));
}

#[test]
fn invalid_documents_exit_one_with_a_locus() {
    let out = afk(&["validate"], Some(r#"{"levels":[[2],[3]],"matrices":[[[2]]]}"#), &[]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["status"], "invalid");
    assert_eq!(v["errors"][0]["kind"], "validation");
    assert_eq!(v["errors"][0]["path"], "matrices[0][0]");

    let out = afk(&["validate"], Some("{\"levels\": [[1]\n,]}"), &[]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["errors"][0]["kind"], "syntax");
    assert_eq!(v["errors"][0]["line"], 2);

    let out = afk(&["validate", "--input", "/nonexistent/diagram.json"], None, &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn telescope_blocked_by_a_chain() {
    let out = afk(&["telescope", "--min-dim", "2", "--input", &data("unitized_compacts.json")], None, &[]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["errors"][0]["kind"], "infinite_chain");
    assert_eq!(v["result"]["witness"]["k"], 1);
}

#[test]
fn telescoped_diagram_is_a_valid_document() {
    let v = json(&afk(&["telescope", "--min-dim", "3", "--input", &data("absorbed_points.json")], None, &[]));
    assert_eq!(v["exit_code"], 0);
    let doc = serde_json::to_string(&v["result"]["diagram"]).unwrap();
    let again = afk(&["fm-profile", "--max-m", "5", "--input", "-"], Some(&doc), &[]);
    assert_eq!(again.status.code(), Some(0));
    let original = json(&afk(&["fm-profile", "--max-m", "5", "--input", &data("absorbed_points.json")], None, &[]));
    assert_eq!(json(&again)["result"]["fm"], original["result"]["fm"]);
}

#[test]
fn export_dot_is_stable_under_reserialization() {
    let text = std::fs::read_to_string(data("four_by_three.json")).unwrap();
    let doc = afk_core::io::parse(&text).unwrap();
    let pretty = doc.serialize();
    let a = afk(&["export-dot", "--format", "text"], Some(&text), &[]);
    let b = afk(&["export-dot", "--format", "text"], Some(&pretty), &[]);
    assert_eq!(a.stdout, b.stdout);
    let dot = String::from_utf8(a.stdout).unwrap();
    assert!(dot.starts_with("digraph bratteli {"));
    assert_eq!(dot.matches("->").count(), 7);
}

#[test]
fn text_format_and_usage_errors() {
    let out = afk(&["--format", "text", "k0q", "--input", &data("golden_mean.json")], None, &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("afk "), "{text}");
    assert!(text.contains("dimension: 2"), "{text}");
    let out = afk(&["fm"], None, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    let out = afk(&["--help"], None, &[]);
    assert_eq!(out.status.code(), Some(0));
}
