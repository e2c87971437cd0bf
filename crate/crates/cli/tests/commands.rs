use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robotaxi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["validate", s(&missing)]).status.code(), Some(1));
    assert_eq!(
        run(&["place", "greedy", s(&missing)]).status.code(),
        Some(2)
    );

    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"n":3,"k":1,"dist":[[0,1,5],[1,0,1],[5,1,0]],"probs":[0.2,0.3,0.5]}"#,
    )
    .unwrap();
    let out = run(&["validate", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn coverage_gadget_validates() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("cov.json");
    let out = run(&[
        "gen",
        "coverage",
        "--elements",
        "4",
        "--budget",
        "2",
        "--out",
        s(&b),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("full-cover placement bound"));
    let v = json(&["validate", s(&b)]);
    assert_eq!(v["message"], "valid metric");
    assert_eq!(v["k"], 2);
}

#[test]
fn coverage_instance_file_validates() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("inst.json");
    fs::write(
        &f,
        r#"{"N":4,"l":2,"epsilon":1.0,"sets":[[0,1],[2,3],[1,2]]}"#,
    )
    .unwrap();
    let v = json(&["validate", s(&f)]);
    assert_eq!(v["valid"], true);
    assert_eq!(v["kind"], "coverage");
}

#[test]
fn tree_dp_matches_tree_exact() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("t.json");
    ok(&[
        "gen",
        "tree",
        "--n",
        "7",
        "--k",
        "3",
        "--seed",
        "5",
        "--out",
        s(&b),
    ]);
    let placed = json(&["place", "tree-dp", s(&b)]);
    let counts: Vec<String> = placed["placement"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.to_string())
        .collect();
    let counts = counts.join(",");
    let tree = json(&["evaluate", s(&b), "--counts", &counts, "--tree-exact"]);
    let exact = json(&["evaluate", s(&b), "--counts", &counts, "--exact"]);
    let cost = placed["cost"].as_f64().unwrap();
    assert!((tree["total"].as_f64().unwrap() - cost).abs() < 1e-9);
    assert!((exact["total"].as_f64().unwrap() - cost).abs() < 1e-9);
}

#[test]
fn placement_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("s.json");
    let p = dir.path().join("p.json");
    ok(&["gen", "star", "--n", "6", "--k", "2", "--out", s(&b)]);
    ok(&["place", "uckm", s(&b), "--out", s(&p)]);
    let v = json(&["evaluate", s(&b), "--placement", s(&p), "--exact"]);
    assert!(v["total"].as_f64().unwrap() > 0.0);
}

#[test]
fn mc_agrees_with_exact() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("e.json");
    ok(&[
        "gen",
        "euclidean",
        "--n",
        "6",
        "--k",
        "4",
        "--seed",
        "2",
        "--out",
        s(&b),
    ]);
    let counts = "1,1,0,1,0,1";
    let exact = json(&["evaluate", s(&b), "--counts", counts, "--exact"]);
    let mc = json(&[
        "evaluate",
        s(&b),
        "--counts",
        counts,
        "--mc",
        "4000",
        "--seed",
        "3",
    ]);
    let e = exact["total"].as_f64().unwrap();
    let mean = mc["total"]["mean"].as_f64().unwrap();
    let se = mc["total"]["stderr"].as_f64().unwrap();
    assert!(
        (mean - e).abs() <= 4.0 * se,
        "mc {mean} ± {se} vs exact {e}"
    );
}

#[test]
fn same_seed_same_output() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("e.json");
    ok(&["gen", "euclidean", "--n", "10", "--k", "7", "--out", s(&b)]);
    let a = run(&["place", "vrrp", s(&b), "--seed", "11"]).stdout;
    let c = run(&["place", "vrrp", s(&b), "--seed", "11"]).stdout;
    assert_eq!(a, c);
    let d = run(&["place", "rp", s(&b), "--seed", "11"]).stdout;
    let e = run(&["place", "rp", s(&b), "--seed", "12"]).stdout;
    assert_ne!(d, e);
}

#[test]
fn bench_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("e.json");
    let csv = dir.path().join("r.csv");
    ok(&["gen", "euclidean", "--n", "8", "--k", "5", "--out", s(&b)]);
    let v = json(&[
        "bench",
        s(&b),
        "--algos",
        "rp,vrrp,rrp",
        "--runs",
        "3",
        "--realizations",
        "20",
        "--csv",
        s(&csv),
    ]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert!(v["rows"][0].get("wall_time_s").is_none());
    let lines = fs::read_to_string(&csv).unwrap().lines().count();
    assert_eq!(lines, 1 + 3 * 3 * 20);
}

#[test]
fn ingest_with_zone_map() {
    let dir = tempfile::tempdir().unwrap();
    let trips = dir.path().join("trips.csv");
    let map = dir.path().join("map.csv");
    fs::write(&trips, "pickup,fare\n132,10\n161,5\n132,7\n237,9\n").unwrap();
    fs::write(&map, "raw_id,index\n132,0\n161,1\n237,2\n").unwrap();
    let v = json(&[
        "ingest",
        s(&trips),
        "--zones",
        "3",
        "--column",
        "pickup",
        "--zone-map",
        s(&map),
    ]);
    assert_eq!(v["trips"], 4);
    let probs: Vec<f64> = v["probs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p.as_f64().unwrap())
        .collect();
    assert_eq!(probs, vec![0.5, 0.25, 0.25]);

    fs::write(&trips, "pickup\n132\n999\n").unwrap();
    let out = run(&[
        "ingest",
        s(&trips),
        "--zones",
        "3",
        "--column",
        "pickup",
        "--zone-map",
        s(&map),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("999"));
}
