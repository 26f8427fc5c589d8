use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sumnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumnet")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn build_scheme_verify_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = sumnet(d, &["build", "--family", "n1", "--m", "2", "--q", "2", "--out", "n1.json", "--dot", "n1.dot"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(d.join("n1.manifest.json").exists());
    assert!(std::fs::read_to_string(d.join("n1.dot")).unwrap().starts_with("digraph"));

    let o = sumnet(d, &["scheme", "--net", "n1.json", "--p", "2", "--out", "c.json"]);
    assert_eq!(o.status.code(), Some(0));

    let o = sumnet(d, &["verify", "--net", "n1.json", "--code", "c.json", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);

    let o = sumnet(d, &["bounds", "--net", "n1.json", "--code", "c.json", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["capacity"], "2/3");
    assert_eq!(v["wrong_char_bound"], "6/11");
    assert_eq!(v["certificate"]["status"], "certified");
}

#[test]
fn refusal_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    sumnet(d, &["build", "--family", "n2", "--m", "2", "--q", "3", "--out", "n2.json"]);
    let o = sumnet(d, &["scheme", "--net", "n2.json", "--p", "3", "--out", "c.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("must not divide"));
    assert!(!d.join("c.json").exists());
}

#[test]
fn broken_code_names_the_terminal() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    sumnet(d, &["build", "--family", "bottleneck2", "--out", "b.json"]);
    assert_eq!(sumnet(d, &["scheme", "--net", "b.json", "--p", "3", "--out", "c.json"]).status.code(), Some(0));
    let text = std::fs::read_to_string(d.join("c.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["terminal_matrices"]["t_2"][0] = serde_json::json!([0]);
    std::fs::write(d.join("bad.json"), v.to_string()).unwrap();
    let o = sumnet(d, &["verify", "--net", "b.json", "--code", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("terminal t_2"), "{}", stdout(&o));
}

#[test]
fn exhaustive_search_on_bottleneck() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    sumnet(d, &["build", "--family", "bottleneck2", "--out", "b.json"]);
    let o = sumnet(
        d,
        &[
            "search",
            "--net",
            "b.json",
            "--r",
            "1",
            "--l",
            "1",
            "--p",
            "3",
            "--exhaustive",
            "--out",
            "s.json",
            "--run-manifest",
            "run.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(d.join("s.json")).unwrap()).unwrap();
    assert_eq!((s["examined"].as_u64(), s["found"].as_u64()), (Some(9), Some(2)));
    let run: Value = serde_json::from_str(&std::fs::read_to_string(d.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["command"], "search");
    assert_eq!(run["pass"], true);
    assert_eq!(run["artifacts"][0], "s.json");
}

#[test]
fn run_manifest_defaults_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let o = sumnet(dir.path(), &["build", "--family", "bottleneck2", "--out", "b.json"]);
    let err = String::from_utf8_lossy(&o.stderr);
    let v: Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(v["command"], "build");
}

#[test]
fn usage_and_parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(sumnet(d, &["build", "--out", "x.json"]).status.code(), Some(2));
    assert_eq!(
        sumnet(d, &["search", "--net", "x", "--r", "1", "--l", "1", "--p", "2", "--out", "o"]).status.code(),
        Some(2)
    );
    std::fs::write(d.join("t.json"), "{\"edges\":[").unwrap();
    let o = sumnet(d, &["verify", "--net", "t.json", "--code", "t.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed JSON"));
}

#[test]
fn manifest_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    sumnet(d, &["build", "--family", "n1", "--m", "1", "--q", "2", "--out", "a.json"]);
    sumnet(d, &["build", "--family", "n1", "--m", "1", "--q", "3", "--out", "b.json"]);
    let o = sumnet(d, &["scheme", "--net", "a.json", "--manifest", "b.manifest.json", "--p", "3", "--out", "c.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not match"));
}
