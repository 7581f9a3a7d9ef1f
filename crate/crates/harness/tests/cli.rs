use std::path::Path;
use std::process::Command;

use wks_harness::commands::{simulate, SimulateConfig, SpcKind};
use wks_harness::config::{parse_weights, universe};
use wks_harness::trace_io::{read_trace, replay};

fn wks() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wks"))
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let status = wks()
            .args(["simulate", "--k", "2", "--universe", "3", "--weights", "1,10", "--random", "12"])
            .args(["--trials", "20", "--seed", "42", "--spc", "random", "--out"])
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
    }
    let (x, y) = (read_dir_sorted(a.path()), read_dir_sorted(b.path()));
    assert_eq!(x.len(), 20 + 3);
    assert_eq!(x, y);
}

#[test]
fn single_server_tracks_the_optimum() {
    let cfg = SimulateConfig {
        universe: universe(2).unwrap(),
        weights: parse_weights("1").unwrap(),
        requests: None,
        random_len: Some(10),
        trials: 100,
        seed: 42,
        spc: SpcKind::Oracle,
        out: None,
    };
    let s = simulate(&cfg).unwrap();
    assert_eq!(s.trials, 100);
    assert_eq!(s.ratio_to_opt.mean, 1.0);
    assert_eq!(s.ratio_to_opt.max, 1.0);
}

#[test]
fn written_traces_replay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SimulateConfig {
        universe: universe(4).unwrap(),
        weights: parse_weights("1,3,9").unwrap(),
        requests: Some(vec![0, 1, 2, 3, 0, 1, 0, 2]),
        random_len: None,
        trials: 5,
        seed: 7,
        spc: SpcKind::Lazy,
        out: Some(dir.path().to_path_buf()),
    };
    simulate(&cfg).unwrap();
    for i in 0..5 {
        let file = read_trace(&dir.path().join(format!("trace_{i:05}.jsonl"))).unwrap();
        assert_eq!(file.records.len(), 8);
        replay(&file).unwrap();
    }
}

#[test]
fn exit_codes() {
    let zero = wks()
        .args(["simulate", "--universe", "2", "--weights", "1", "--random", "5", "--trials", "0"])
        .output()
        .unwrap();
    assert_eq!(zero.status.code(), Some(1));
    let bad = wks().args(["verify", "--suite", "nonsense"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let budget = wks()
        .args(["opt", "--universe", "200", "--weights", "1,2,3,4", "--random", "50"])
        .output()
        .unwrap();
    assert_eq!(budget.status.code(), Some(3));
    let ok = wks().args(["verify", "--suite", "setsystem"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report[0]["passed"], true);
}

#[test]
fn adversary_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = wks()
        .args(["adversary", "--k", "2", "--beta", "10", "--calls", "30", "--trials", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["k"], 2);
    let calls = std::fs::read_to_string(dir.path().join("adversary_calls.csv")).unwrap();
    assert_eq!(calls.lines().count(), 1 + 60);
    let single = wks()
        .args(["adversary", "--k", "2", "--beta", "100", "--calls", "1"])
        .output()
        .unwrap();
    let s: serde_json::Value = serde_json::from_slice(&single.stdout).unwrap();
    assert_eq!(s["accounted_calls"], 1);
    let k1 = wks().args(["adversary", "--k", "1", "--beta", "10", "--calls", "4"]).status().unwrap();
    assert!(k1.success());
}

#[test]
fn ratio_table() {
    let out = wks().args(["ratio", "--k", "2", "--beta", "3"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1,2,3/2,245/24,1"));
    assert!(text.contains("2,4,25/12,37/12,"));
}
