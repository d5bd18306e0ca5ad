use std::path::Path;
use std::process::{Command, Output};

use replan::bench::{read_raw, RAW_HEADER, SUMMARY_HEADER};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_replan-bench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn validate_bundled_and_files() {
    assert_eq!(code(&bench(&["validate", "--scenario", "dynamic"])), 0);
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("p.scenario");
    std::fs::write(&good, replan::scenario::PARTIAL_SCENARIO).unwrap();
    let o = bench(&["validate", "--scenario", good.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("6 obstacles"));

    let bad = dir.path().join("bad.scenario");
    let text = replan::scenario::PARTIAL_SCENARIO.replace("\"start\": [8, 8]", "\"start\": [31, 10]");
    assert_ne!(text, replan::scenario::PARTIAL_SCENARIO);
    std::fs::write(&bad, text).unwrap();
    let o = bench(&["validate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("start"));

    let junk = dir.path().join("junk.scenario");
    std::fs::write(&junk, "{ not json").unwrap();
    assert_eq!(code(&bench(&["validate", "--scenario", junk.to_str().unwrap()])), 2);

    assert_eq!(code(&bench(&["validate", "--scenario", "/nonexistent/x.scenario"])), 3);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&bench(&[])), 1);
    assert_eq!(
        code(&bench(&[
            "run",
            "--scenario",
            "partial",
            "--algo",
            "astar",
            "--out",
            "/tmp/x"
        ])),
        1
    );
    assert_eq!(code(&bench(&["--help"])), 0);
    assert_eq!(code(&bench(&["--version"])), 0);
}

#[test]
fn run_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = bench(&[
        "run",
        "--scenario",
        "partial",
        "--algo",
        "multistage",
        "drrt",
        "--runs",
        "3",
        "--seed",
        "5",
        "--workers",
        "2",
        "--out",
        out.to_str().unwrap(),
        "--trace",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("Multi-stage") && stdout.contains("DRRT"));

    let raw_text = std::fs::read_to_string(out.join("partial_raw.csv")).unwrap();
    assert_eq!(raw_text.lines().next().unwrap(), RAW_HEADER);
    let rows = read_raw(raw_text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows.iter().map(|r| r.seed).collect::<Vec<_>>(), [5, 6, 7, 5, 6, 7]);

    let summary = std::fs::read_to_string(out.join("partial_summary.csv")).unwrap();
    assert_eq!(summary.lines().next().unwrap(), SUMMARY_HEADER);
    assert_eq!(summary.lines().count(), 3);

    for name in ["partial_multistage_seed5.svg", "partial_drrt_seed5.svg"] {
        let svg = std::fs::read_to_string(out.join(name)).unwrap();
        roxmltree::Document::parse(&svg).unwrap();
    }

    let svg = dir.path().join("replay.svg");
    let raw = out.join("partial_raw.csv");
    let o = bench(&[
        "replay",
        "--raw",
        raw.to_str().unwrap(),
        "--trial",
        "4",
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stderr.is_empty(), "replay should reproduce the row");
    assert!(Path::new(&svg).exists());

    let o = bench(&[
        "replay",
        "--raw",
        raw.to_str().unwrap(),
        "--trial",
        "99",
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let o = bench(&[
        "replay",
        "--raw",
        "/nonexistent.csv",
        "--trial",
        "0",
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = bench(&[
        "run",
        "--scenario",
        "partial",
        "--algo",
        "drrt",
        "--runs",
        "1",
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
}
