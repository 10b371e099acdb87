//! End-to-end runs of the command-line binary: pipes, determinism, exit
//! codes, and round-trips through the on-disk formats.

use std::io::Write as _;
use std::process::{Command, Stdio};

use jsjtri::tri::Triangulation;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jsjtri"))
}

fn run_with_stdin(args: &[&str], stdin: &str) -> (String, String, i32) {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    let out = child.wait_with_output().expect("wait");
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap_or(-1),
    )
}

#[test]
fn gen_graph_pipes_into_width() {
    let out = bin().args(["gen-graph", "grid", "3"]).output().unwrap();
    assert!(out.status.success());
    let graph = String::from_utf8(out.stdout).unwrap();
    let (stdout, _, code) = run_with_stdin(&["width", "-"], &graph);
    assert_eq!(code, 0);
    assert_eq!(stdout, "tw=3 pw=3\n");
}

#[test]
fn block_emits_expected_tetrahedron_count() {
    let out = bin().args(["block", "3"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let tri = Triangulation::parse(&text).unwrap();
    assert_eq!(tri.tetrahedron_count(), 33);
    tri.validate().unwrap();
}

#[test]
fn build_and_verify_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let graph_path = dir.path().join("p2.graph");
    std::fs::write(&graph_path, "p 2\n0 1\n").unwrap();
    let base = dir.path().join("p2");
    let status = bin()
        .args(["build"])
        .arg(&graph_path)
        .arg("-o")
        .arg(&base)
        .status()
        .unwrap();
    assert!(status.success());

    let tri_path = dir.path().join("p2.tri");
    let meta_path = dir.path().join("p2.meta");
    let out = bin()
        .args(["verify"])
        .arg(&graph_path)
        .arg(&tri_path)
        .arg(&meta_path)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.lines().all(|l| l.starts_with("check ")));
    assert!(report.contains("check size-bound pass"));

    // every emitted triangulation re-reads and passes validation
    let tri = Triangulation::parse(&std::fs::read_to_string(&tri_path).unwrap()).unwrap();
    tri.validate().unwrap();

    // tampered metadata must fail verification with exit code 2
    let meta = std::fs::read_to_string(&meta_path).unwrap();
    let tampered = meta.replace("ends 0 1", "ends 0 0");
    assert_ne!(meta, tampered);
    std::fs::write(&meta_path, tampered).unwrap();
    let out = bin()
        .args(["verify"])
        .arg(&graph_path)
        .arg(&tri_path)
        .arg(&meta_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let graph_path = dir.path().join("c3.graph");
    std::fs::write(&graph_path, "0 1\n1 2\n0 2\n").unwrap();
    for base in ["a", "b"] {
        let status = bin()
            .args(["build"])
            .arg(&graph_path)
            .arg("-o")
            .arg(dir.path().join(base))
            .args(["--seed", "7"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let tri_a = std::fs::read(dir.path().join("a.tri")).unwrap();
    let tri_b = std::fs::read(dir.path().join("b.tri")).unwrap();
    assert_eq!(tri_a, tri_b);
    let meta_a = std::fs::read(dir.path().join("a.meta")).unwrap();
    let meta_b = std::fs::read(dir.path().join("b.meta")).unwrap();
    assert_eq!(meta_a, meta_b);
}

#[test]
fn export_strips_comments_and_is_canonical() {
    let dir = tempfile::tempdir().unwrap();
    let block_path = dir.path().join("block.tri");
    let status = bin()
        .args(["block", "2", "-o"])
        .arg(&block_path)
        .status()
        .unwrap();
    assert!(status.success());
    let out = bin().args(["export"]).arg(&block_path).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('#'));
    let a = Triangulation::parse(&std::fs::read_to_string(&block_path).unwrap()).unwrap();
    let b = Triangulation::parse(&text).unwrap();
    assert_eq!(a, b);
}

#[test]
fn usage_and_io_errors_exit_one() {
    let status = bin().args(["no-such-command"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
    let status = bin()
        .args(["width", "/definitely/not/a/file"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn width_exact_over_budget_is_an_error() {
    let out = bin().args(["gen-graph", "grid", "6"]).output().unwrap();
    let graph = String::from_utf8(out.stdout).unwrap();
    let (_, stderr, code) = run_with_stdin(&["width", "--exact", "-"], &graph);
    assert_eq!(code, 1);
    assert!(stderr.contains("budget"));
    // without --exact the command degrades to bounds
    let (stdout, _, code) = run_with_stdin(&["width", "-"], &graph);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("tw_lower="));
}

#[test]
fn width_of_triangulation_uses_the_dual_graph() {
    let out = bin().args(["block", "1"]).output().unwrap();
    let block = String::from_utf8(out.stdout).unwrap();
    let (stdout, _, code) = run_with_stdin(&["width", "-"], &block);
    assert_eq!(code, 0);
    // 15 tetrahedra: within the exact budget, prints exact values
    assert!(stdout.starts_with("tw="), "{stdout}");
}
