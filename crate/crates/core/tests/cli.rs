mod common;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use common::{P1, P2};

fn aspnav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aspnav")).args(args).output().unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_aspnav"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn solve_prints_an_answer_set() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = write(dir.path(), "p1.lp", P1);
    let o = aspnav(&["solve", "--strategy", "smodelscc", p1.to_str().unwrap()]);
    assert_eq!(stdout(&o), "a c\n");
    assert_eq!(o.status.code(), Some(10));
}

#[test]
fn solve_reports_unsatisfiable() {
    let dir = tempfile::tempdir().unwrap();
    let p2 = write(dir.path(), "p2.lp", P2);
    let o = aspnav(&["solve", p2.to_str().unwrap()]);
    assert_eq!(stdout(&o), "UNSATISFIABLE\n");
    assert_eq!(o.status.code(), Some(20));
}

#[test]
fn reads_stdin() {
    let o = with_stdin(&["solve", "--strategy", "sup"], P1);
    assert_eq!(stdout(&o), "a c\n");
    let o = with_stdin(&["enum", "--check", "-"], P1);
    assert_eq!(stdout(&o), "a c\nb\n");
    assert_eq!(o.status.code(), Some(10));
}

#[test]
fn verify_checks_conformance() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = write(dir.path(), "p1.lp", P1);
    let trace = dir.path().join("p1.trace");
    let (p1, trace) = (p1.to_str().unwrap(), trace.to_str().unwrap());
    assert_eq!(aspnav(&["trace", "--strategy", "smodelscc", "--trace", trace, p1]).status.code(), Some(10));

    let o = aspnav(&["verify", "--strategy", "sup", p1, trace]);
    assert!(stdout(&o).starts_with("non-conformant at step 4"), "{}", stdout(&o));
    assert_eq!(o.status.code(), Some(1));

    let o = aspnav(&["verify", "--strategy", "smodelscc", "--mode", "semantic", p1, trace]);
    assert_eq!(stdout(&o), "valid, conformant\n");
    assert_eq!(o.status.code(), Some(0));

    let o = aspnav(&["verify", p1, trace]);
    assert_eq!(stdout(&o), "valid\n");
}

#[test]
fn verify_rejects_a_doctored_trace() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = write(dir.path(), "p1.lp", P1);
    let o = aspnav(&["trace", p1.to_str().unwrap()]);
    let text = stdout(&o).replacen("\"lit\":\"c\"", "\"lit\":\"d\"", 1);
    let trace = write(dir.path(), "bad.trace", &text);
    let o = aspnav(&["verify", p1.to_str().unwrap(), trace.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("invalid at step 2"), "{}", stdout(&o));
    assert_eq!(o.status.code(), Some(1));

    let partial: String = stdout(&aspnav(&["trace", p1.to_str().unwrap()])).lines().take(2).map(|l| format!("{l}\n")).collect();
    let trace = write(dir.path(), "partial.trace", &partial);
    let args = |extra: &[&'static str]| {
        let mut v: Vec<String> = vec!["verify".into()];
        v.extend(extra.iter().map(|s| s.to_string()));
        v.push(p1.to_str().unwrap().into());
        v.push(trace.to_str().unwrap().into());
        v
    };
    let run = |a: Vec<String>| Command::new(env!("CARGO_BIN_EXE_aspnav")).args(a).output().unwrap();
    assert_eq!(run(args(&[])).status.code(), Some(1));
    assert_eq!(run(args(&["--prefix-ok"])).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.lp", "a :- not b.\nb :- .\n");
    let o = aspnav(&["solve", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let p1 = write(dir.path(), "p1.lp", P1);
    let p1 = p1.to_str().unwrap();
    for args in [
        vec!["solve", "--strategy", "smodels", p1],
        vec!["solve", "--strategy", "custom:bj+fail,up", p1],
        vec!["solve", "--restarts", "geometric", p1],
        vec!["solve", "--forget", "cap:x", p1],
        vec!["frobnicate"],
        vec!["solve", "/nonexistent/program.lp"],
    ] {
        assert_eq!(aspnav(&args).status.code(), Some(2), "{args:?}");
    }
    let garbage = write(dir.path(), "garbage.trace", "not json\n");
    let o = aspnav(&["verify", p1, garbage.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn info_describes_the_program() {
    let o = with_stdin(&["info"], P1);
    assert_eq!(stdout(&o), "atoms: 4\nrules: 5\ntight: no\nscc: a\nscc: b\nscc: c\nscc: d (cyclic)\n");
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn policies_and_heuristics_are_accepted() {
    let o = with_stdin(
        &["solve", "--heuristic", "activity", "--seed", "9", "--restarts", "luby:4", "--forget", "cap:8", "--stats"],
        P1,
    );
    assert_eq!(o.status.code(), Some(10));
    assert!(String::from_utf8_lossy(&o.stderr).contains("decisions"));
    let o = with_stdin(&["solve", "--forget", "off", "--restarts", "off"], P2);
    assert_eq!(o.status.code(), Some(20));
}
