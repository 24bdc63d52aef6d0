//! End-to-end checks of the command-line surface: exit codes, error
//! reporting, and the reduce -> solve round trip through files.

use std::path::Path;
use std::process::{Command, Output};

fn nqp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nqp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const VALID: &str = "\
NQP 1
DOMAIN int
PSD declared
N 2
S 3 : 0 1 2
Q
2 -1
-1 2
C
-3 1
";

#[test]
fn validate_reports_ok_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ok.nqp");
    write(&file, VALID);
    let out = nqp(&["validate", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("ok: all invariants hold"), "{text}");
}

#[test]
fn validate_flags_violations_and_exits_one() {
    // asymmetric Q is rejected at parse time; an undeclared-PSD violation is
    // exercised through a negative diagonal with PSD declared
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.nqp");
    write(
        &file,
        "NQP 1\nDOMAIN int\nPSD declared\nN 1\nS 2 : 0 1\nQ\n-1\nC\n0\n",
    );
    let out = nqp(&["validate", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("principal minor"), "{text}");
}

#[test]
fn parse_errors_name_the_line_and_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.nqp");
    write(
        &file,
        "NQP 1\nDOMAIN int\nPSD unknown\nN 2\nS 2 : 0 1\nQ\n1 0\nC\n0 0\n",
    );
    let out = nqp(&["solve", file.to_str().unwrap(), "--solver", "brute"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 8"), "{err}");
}

#[test]
fn budget_refusal_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ok.nqp");
    write(&file, VALID);
    let out = nqp(&[
        "solve",
        file.to_str().unwrap(),
        "--solver",
        "brute",
        "--budget",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("budget"), "{err}");
}

#[test]
fn solve_prints_machine_lines() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ok.nqp");
    write(&file, VALID);
    let out = nqp(&["solve", file.to_str().unwrap(), "--solver", "brute"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("OBJECTIVE ")), "{text}");
    assert!(text.lines().any(|l| l.starts_with("ASSIGNMENT ")), "{text}");
}

#[test]
fn reduce_writes_a_solvable_file() {
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("binary.nqp");
    write(
        &source,
        "NQP 1\nDOMAIN int\nPSD declared\nN 1\nS 2 : 0 1\nQ\n2\nC\n-3\n",
    );
    let reduced = dir.path().join("reduced.nqp");
    let out = nqp(&[
        "reduce",
        source.to_str().unwrap(),
        "--set=0,1,2",
        "--out",
        reduced.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let text = std::fs::read_to_string(&reduced).unwrap();
    assert!(text.contains("# M 10"), "{text}");

    let solve = nqp(&["solve", reduced.to_str().unwrap(), "--solver", "brute"]);
    assert_eq!(solve.status.code(), Some(0));
    let solve_text = String::from_utf8(solve.stdout).unwrap();
    assert!(solve_text.contains("OBJECTIVE -1"), "{solve_text}");
    assert!(solve_text.contains("ASSIGNMENT 1"), "{solve_text}");
}

#[test]
fn verify_reduction_passes_on_sound_input() {
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("binary.nqp");
    write(
        &source,
        "NQP 1\nDOMAIN int\nPSD declared\nN 2\nS 2 : 0 1\nQ\n1 0\n0 1\nC\n-3 1\n",
    );
    let out = nqp(&[
        "verify-reduction",
        source.to_str().unwrap(),
        "--set=-4,-1,2,6",
        "--exhaustive",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("OBJECTIVE -2"), "{text}");
    assert!(text.contains("verified"), "{text}");
}

#[test]
fn reduce_requires_a_declared_psd_input() {
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("binary.nqp");
    write(
        &source,
        "NQP 1\nDOMAIN int\nPSD unknown\nN 1\nS 2 : 0 1\nQ\n2\nC\n-3\n",
    );
    let reduced = dir.path().join("reduced.nqp");
    let refused = nqp(&[
        "reduce",
        source.to_str().unwrap(),
        "--set=0,1,2",
        "--out",
        reduced.to_str().unwrap(),
    ]);
    assert_eq!(refused.status.code(), Some(1));

    let allowed = nqp(&[
        "reduce",
        source.to_str().unwrap(),
        "--set=0,1,2",
        "--out",
        reduced.to_str().unwrap(),
        "--allow-indefinite",
    ]);
    assert_eq!(allowed.status.code(), Some(0));
}

#[test]
fn unsorted_level_list_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let source = dir.path().join("binary.nqp");
    write(
        &source,
        "NQP 1\nDOMAIN int\nPSD declared\nN 1\nS 2 : 0 1\nQ\n2\nC\n-3\n",
    );
    let out = nqp(&[
        "reduce",
        source.to_str().unwrap(),
        "--set=2,1,0",
        "--out",
        dir.path().join("x.nqp").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rc_demo_runs_the_sine_task() {
    let out = nqp(&[
        "rc-demo",
        "--neurons",
        "15",
        "--length",
        "200",
        "--washout",
        "40",
        "--task",
        "sine",
        "--set=-1,0,1",
        "--ridge",
        "1e-6",
        "--solver",
        "multi",
        "--starts",
        "4",
        "--seed",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.lines().any(|l| l.starts_with("NMSE continuous ")),
        "{text}"
    );
    assert!(
        text.lines().any(|l| l.starts_with("NMSE discrete ")),
        "{text}"
    );
    assert!(text.lines().any(|l| l.starts_with("GAP ")), "{text}");
}

#[test]
fn real_domain_files_solve_with_heuristics() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("real.nqp");
    write(
        &file,
        "NQP 1\nDOMAIN real\nPSD declared\nN 2\nS 3 : -1 0 1\nQ\n1.5 0.25\n0.25 2.0\nC\n-1.75 0.5\n",
    );
    let out = nqp(&[
        "solve",
        file.to_str().unwrap(),
        "--solver",
        "anneal",
        "--seed",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("OBJECTIVE ")), "{text}");
}
