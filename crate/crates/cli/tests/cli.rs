use std::process::{Command, Output};

use serde_json::Value;

fn buffon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_buffon"))
        .args(args)
        .env_remove("BUFFON_MAX_TERMS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn trace_single_zero_bit() {
    let out = buffon(&["trace", "--constant", "gamma", "--bits", "0"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["y"], 1);
    assert_eq!(v["m"], 1);
    assert_eq!(v["l"], 1);
    assert_eq!(v["n_m"], 2);
    assert_eq!(v["schedule"], serde_json::json!([[2, 2]]));
}

#[test]
fn trace_three_bits() {
    let out = buffon(&["trace", "--constant", "gamma", "--bits", "110"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!((v["y"].as_u64(), v["m"].as_u64()), (Some(0), Some(3)));
    assert_eq!((v["l"].as_u64(), v["n_m"].as_u64()), (Some(3), Some(4)));
}

#[test]
fn trace_exhausted_input() {
    let out = buffon(&["trace", "--constant", "gamma", "--bits", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["complete"], false);
    assert_eq!(v["consumed"], 1);
}

#[test]
fn trace_csv() {
    let out = buffon(&["trace", "--constant", "gamma", "--bits", "110", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "y,m,l,n_m,schedule\n0,3,3,4,2:2;3:0;4:0\n");
}

#[test]
fn enumerate_shallow() {
    for (name, low) in [("gamma", "1/2"), ("pi4", "3/4")] {
        let out = buffon(&["enumerate", "--constant", name, "--depth", "3"]);
        assert!(out.status.success(), "{name}");
        let v = json(&out);
        assert_eq!(v["p_one_low"], low, "{name}");
        assert_eq!(v["unresolved"], "1/8");
    }
}

#[test]
fn enumerate_rational_brackets_value() {
    let out = buffon(&["enumerate", "--constant", "rational:1/3", "--depth", "40"]);
    assert!(out.status.success());
    let v = json(&out);
    let low: buffon::Rational = v["p_one_low"].as_str().unwrap().parse().unwrap();
    let high: buffon::Rational = v["p_one_high"].as_str().unwrap().parse().unwrap();
    let third = buffon::Rational::new(1, 3).unwrap();
    assert!(low <= third && third <= high);
    assert!(&high - &low <= buffon::Rational::dyadic(39));
}

#[test]
fn enumerate_time_limit() {
    let out = buffon(&[
        "enumerate", "--constant", "ln2", "--depth", "40", "--time-limit", "0.2",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_constant_is_usage_error() {
    let out = buffon(&["trace", "--constant", "e", "--bits", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = buffon(&["enumerate", "--constant", "rational:3/2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn max_terms_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_buffon"))
        .args(["enumerate", "--constant", "gamma", "--depth", "10"])
        .env("BUFFON_MAX_TERMS", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_buffon"))
        .args(["enumerate", "--constant", "gamma", "--depth", "3"])
        .env("BUFFON_MAX_TERMS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn estimate_is_reproducible_across_shards() {
    let dir = tempfile::tempdir().unwrap();
    let run = |shards: &str, file: &str| {
        let path = dir.path().join(file);
        let out = buffon(&[
            "estimate",
            "--constant",
            "pi4",
            "--trials",
            "20000",
            "--seed",
            "9",
            "--shards",
            shards,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(path).unwrap()
    };
    let a = run("2", "a.json");
    let b = run("2", "b.json");
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["trials"], 20000);
    assert_eq!(v["flagged"], false);
    assert!(v["exact"]["mean_y"].as_str().unwrap().contains('/'));

    let c: Value = serde_json::from_str(&run("3", "c.json")).unwrap();
    assert_eq!(v["exact"], c["exact"]);
}

#[test]
fn tails_csv_bounds() {
    let out = buffon(&[
        "tails", "--constant", "gamma", "--trials", "5000", "--seed", "1", "--shards", "1",
    ]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let bounds: Vec<String> = reader
        .records()
        .map(|r| r.unwrap())
        .filter(|r| &r[0] == "L")
        .map(|r| r[5].to_string())
        .take(3)
        .collect();
    assert_eq!(bounds, ["1/1", "1/2", "1/4"]);
}
