mod common;

use std::path::Path;
use std::process::{Command, Output};

use ontomas::kb::KnowledgeBase;
use ontomas::runtime::expected_performance;

use common::fixture;

fn ontomas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ontomas"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn build(dir: &Path) -> std::path::PathBuf {
    let kb = dir.join("kb.ttl");
    let o = ontomas(&["build", "--csv-dir", p(&fixture("case_study")), "--out", p(&kb)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    kb
}

#[test]
fn build_writes_the_case_study() {
    let dir = tempfile::tempdir().unwrap();
    let kb = build(dir.path());
    let o = ontomas(&["build", "--csv-dir", p(&fixture("case_study")), "--out", p(&kb)]);
    assert!(stdout(&o).contains("9 resources"), "{}", stdout(&o));
    let text = std::fs::read_to_string(&kb).unwrap();
    assert_eq!(text, std::fs::read_to_string(fixture("turtle/case_study.ttl")).unwrap());
}

#[test]
fn simulate_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let kb = build(dir.path());
    let out = dir.path().join("run");
    let o = ontomas(&[
        "simulate",
        "--kb",
        p(&kb),
        "--scenario",
        p(&fixture("scenarios/default.toml")),
        "--out-dir",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("policy ticks"));

    let csv = std::fs::read_to_string(out.join("oee.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("resource,windowStart,windowEnd"));
    assert_eq!(lines.count(), 8, "two windows of four machines");
    assert!(!std::fs::read_to_string(out.join("trace.jsonl")).unwrap().is_empty());

    // the report shows what the simulation left in the final KB
    let final_kb = KnowledgeBase::load_turtle(&std::fs::read_to_string(out.join("kb-final.ttl")).unwrap()).unwrap();
    let m1 = expected_performance(&final_kb, "P1@M1").unwrap();
    let o = ontomas(&[
        "report",
        "--kb",
        p(&out.join("kb-final.ttl")),
        "--resource",
        "M1",
        "--window",
        "0..500",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(
        text.contains(&format!(
            "expected P1@M1: {} min, {} kWh",
            m1.duration_min(),
            m1.energy_kwh()
        )),
        "{text}"
    );
    assert!(text.contains("uptime 0.44"), "{text}");
}

#[test]
fn exit_codes_separate_usage_from_domain_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ontomas(&["build"]).status.code(), Some(2));
    let missing = dir.path().join("absent.ttl");
    assert_eq!(
        ontomas(&["report", "--kb", p(&missing), "--resource", "M1", "--window", "0..10"])
            .status
            .code(),
        Some(2)
    );
    let kb = build(dir.path());
    let o = ontomas(&["report", "--kb", p(&kb), "--resource", "M9", "--window", "0..10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("M9"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "horizon_min = -3\n").unwrap();
    let o = ontomas(&[
        "simulate",
        "--kb",
        p(&kb),
        "--scenario",
        p(&bad),
        "--out-dir",
        p(&dir.path().join("x")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}
