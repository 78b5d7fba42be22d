//! End-to-end checks of the command-line interface: exit codes, determinism
//! and pipeline composition.

use std::path::Path;
use std::process::{Command, Output, Stdio};

use t4ct::fixtures;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_t4ct"))
}

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn t4ct");
    use std::io::Write;
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().expect("t4ct runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn count_prints_the_sequence_and_is_deterministic() {
    let a = run(&["count", "--n", "6"], "");
    assert!(a.status.success());
    let text = stdout(&a);
    let last: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().last().unwrap())
        .collect();
    assert_eq!(last, vec!["0", "1", "6", "40", "268", "1801", "12120"]);
    let b = run(&["count", "--n", "6"], "");
    assert_eq!(a.stdout, b.stdout, "identical runs produce identical bytes");
}

#[test]
fn count_json_format() {
    let out = run(&["count", "--n", "2", "--format", "json"], "");
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"total\":[\"0\",\"1\",\"6\"]"), "got: {text}");
}

#[test]
fn check_accepts_k7_and_rejects_stacked() {
    let k7 = fixtures::k7().write_tmap();
    let ok = run(&["check"], &k7);
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("essentially 4-connected: yes"));

    let stacked = fixtures::k7_stacked().write_tmap();
    let bad = run(&["check"], &stacked);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("essentially 4-connected: no"));
}

#[test]
fn check_rejects_garbage_with_exit_1() {
    let out = run(&["check"], "not a tmap\n");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["count"], ""); // missing --n
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["no-such-command"], "");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipeline_composition_reproduces_the_input() {
    let mut g = fixtures::k7();
    g.set_root(Some(0));
    let tmap = g.write_tmap();
    let ts = run(&["ts"], &tmap);
    assert!(ts.status.success(), "{}", String::from_utf8_lossy(&ts.stderr));
    let ts_again = run(&["ts"], &tmap);
    assert_eq!(ts.stdout, ts_again.stdout, "ts output is byte-identical across runs");
    let orient = run(&["orient", "--minimize", "--root", "0"], &stdout(&ts));
    assert!(orient.status.success(), "{}", String::from_utf8_lossy(&orient.stderr));
    let mobile = run(&["mobile", "--root", "0"], &stdout(&orient));
    assert!(mobile.status.success(), "{}", String::from_utf8_lossy(&mobile.stderr));
    let rebuilt = run(&["rebuild"], &stdout(&mobile));
    assert!(rebuilt.status.success(), "{}", String::from_utf8_lossy(&rebuilt.stderr));
    // the rebuilt map is K7 again, with the same root, in canonical labels
    let out = t4ct::map::ToroidalMap::parse_tmap(&stdout(&rebuilt)).unwrap();
    assert_eq!(
        out.rooted_code(out.root().unwrap()),
        g.rooted_code(0),
        "pipeline must reproduce the rooted input"
    );
}

#[test]
fn encode_decode_files() {
    let dir = tempfile::tempdir().unwrap();
    let code_path = dir.path().join("k7.t4ct");
    let tmap_path = dir.path().join("k7.tmap");
    let mut g = fixtures::k7();
    g.set_root(Some(0));
    std::fs::write(&tmap_path, g.write_tmap()).unwrap();
    let enc = bin()
        .args(["encode"])
        .arg(&tmap_path)
        .args(["--output"])
        .arg(&code_path)
        .output()
        .unwrap();
    assert!(enc.status.success(), "{}", String::from_utf8_lossy(&enc.stderr));
    let payload = std::fs::read_to_string(&code_path).unwrap();
    assert!(payload.starts_with("T4CT "));

    let out_path = dir.path().join("rebuilt.tmap");
    let dec = bin()
        .args(["decode"])
        .arg(&code_path)
        .args(["--output"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(dec.status.success(), "{}", String::from_utf8_lossy(&dec.stderr));
    let rebuilt = t4ct::map::ToroidalMap::parse_tmap(&std::fs::read_to_string(&out_path).unwrap())
        .unwrap();
    assert_eq!(rebuilt.rooted_code(rebuilt.root().unwrap()), g.rooted_code(0));
}

#[test]
fn decode_truncated_file_fails_without_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let code_path = dir.path().join("bad.t4ct");
    let out_path = dir.path().join("out.tmap");
    let mut g = fixtures::k7();
    g.set_root(Some(0));
    let code = t4ct::codec::encode(&g, 0, 3).unwrap();
    let text = code.to_file();
    let lines: Vec<&str> = text.lines().collect();
    let truncated = format!("{}\n{}\n", lines[0], &lines[1][..lines[1].len() - 4]);
    std::fs::write(&code_path, truncated).unwrap();
    let dec = bin()
        .args(["decode"])
        .arg(&code_path)
        .args(["--output"])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(dec.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&dec.stderr).is_empty(), "an error message is printed");
    assert!(!Path::new(&out_path).exists(), "no partial output file is written");
}

#[test]
fn census_n1() {
    let out = run(&["census", "--n", "1"], "");
    assert!(out.status.success());
    assert!(stdout(&out).contains("rooted 1"));
    let json = run(&["census", "--n", "1", "--format", "json"], "");
    assert!(stdout(&json).contains("\"rooted\":1"));
}

#[test]
fn lattice_emits_digest_edges() {
    let g = fixtures::two_vertex().write_tmap();
    let out = run(&["lattice", "--root", "0"], &g);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("states "));
    assert!(text.contains("minimum "));
    assert!(text.contains("maximum "));
    // determinism of digests
    let again = run(&["lattice", "--root", "0"], &g);
    assert_eq!(out.stdout, again.stdout);
}
