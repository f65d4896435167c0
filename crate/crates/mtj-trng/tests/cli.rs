// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mtj-trng"));
    c.env_remove("MTJ_TRNG_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn mtj-trng")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn generate_packed_with_metadata() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rhs.bin");
    ok(&[
        "generate",
        "--variant",
        "rhs-trng",
        "--bits",
        "1000000",
        "--seed",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(fs::metadata(&out).unwrap().len(), 125_000);
    let meta = read_json(&dir.path().join("rhs.bin.json"));
    assert_eq!(meta["stream"]["n_bits"], 1_000_000);
    assert_eq!(meta["stream"]["seed"], 1);
    assert_eq!(meta["stream"]["variant"], "rhs-trng");
    let t = meta["stream"]["simulated_time_ns"].as_f64().unwrap();
    assert!((t - 3.3e6).abs() < 1e-3, "{t}");
    let p = meta["entropy"]["p_one"].as_f64().unwrap();
    assert!((p - 0.5).abs() < 0.005, "{p}");
}

#[test]
fn generate_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    let c = dir.path().join("c.bin");
    for (p, seed) in [(&a, "9"), (&b, "9"), (&c, "10")] {
        ok(&[
            "generate",
            "--bits",
            "4096",
            "--seed",
            seed,
            "--out",
            path_str(p),
        ]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn round_trip_packed_and_ascii() {
    let dir = TempDir::new().unwrap();
    for name in ["s.bin", "s.txt"] {
        let out = dir.path().join(name);
        let report = dir.path().join(format!("{name}.report.json"));
        ok(&[
            "generate",
            "--bits",
            "200000",
            "--seed",
            "3",
            "--out",
            path_str(&out),
        ]);
        let text = ok(&[
            "test",
            "--in",
            path_str(&out),
            "--bits",
            "200000",
            "--groups",
            "2",
            "--json",
            path_str(&report),
        ]);
        assert!(text.contains("Frequency"), "{text}");
        let meta = read_json(&dir.path().join(format!("{name}.json")));
        let rep = read_json(&report);
        assert_eq!(rep["entropy"]["n_bits"], 200_000);
        assert_eq!(rep["entropy"]["p_one"], meta["entropy"]["p_one"]);
        assert_eq!(rep["nist"].as_array().unwrap().len(), 14);
    }
    let ascii = fs::read_to_string(dir.path().join("s.txt")).unwrap();
    assert!(ascii
        .lines()
        .all(|l| l.len() <= 64 && l.bytes().all(|b| b == b'0' || b == b'1')));
}

#[test]
fn analyze_symmetric_point() {
    let out = ok(&["analyze", "--p1", "0.6", "--p2", "0.6", "--json"]);
    let rows: Value = serde_json::from_str(&out).unwrap();
    let r = &rows[0];
    assert!((r["p_out_1"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((r["lag1"].as_f64().unwrap() + 0.2).abs() < 1e-12);
    assert!((r["shannon"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn analyze_grid_table() {
    let out = ok(&["analyze", "--p1", "0.3,0.7", "--p2", "0.4,0.5"]);
    assert_eq!(out.lines().count(), 5);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["generate", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        run(&["test", "--in", "/nonexistent/bits.bin"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["analyze", "--p1", "1.5", "--p2", "0.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));

    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"seed\": ").unwrap();
    let out = run(&[
        "--config",
        path_str(&bad),
        "analyze",
        "--p1",
        "0.5",
        "--p2",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let unknown = dir.path().join("unknown.json");
    fs::write(&unknown, r#"{ "sede": 1 }"#).unwrap();
    let out = run(&[
        "--config",
        path_str(&unknown),
        "generate",
        "--bits",
        "8",
        "--out",
        path_str(&dir.path().join("x.bin")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_seed_is_echoed() {
    let dir = TempDir::new().unwrap();
    let out = bin()
        .args([
            "generate",
            "--bits",
            "64",
            "--out",
            path_str(&dir.path().join("r.bin")),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    let seed: u64 = err.trim().strip_prefix("seed: ").unwrap().parse().unwrap();
    let meta = read_json(&dir.path().join("r.bin.json"));
    assert_eq!(meta["stream"]["seed"], seed);
}

#[test]
fn config_from_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{ "seed": 77, "generator": { "variant": "conv-p-to-ap" } }"#,
    )
    .unwrap();
    let out = dir.path().join("e.bin");
    let status = bin()
        .env("MTJ_TRNG_CONFIG", &cfg)
        .args(["generate", "--bits", "1024", "--out", path_str(&out)])
        .status()
        .unwrap();
    assert!(status.success());
    let meta = read_json(&dir.path().join("e.bin.json"));
    assert_eq!(meta["stream"]["seed"], 77);
    assert_eq!(meta["stream"]["variant"], "conv-p-to-ap");
}

#[test]
fn sweep_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("v.csv");
    ok(&[
        "sweep",
        "--axis",
        "voltage",
        "--variants",
        "rhs-trng,conv-ap-to-p",
        "--bits-per-point",
        "20000",
        "--seed",
        "5",
        "--out",
        path_str(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "variant,axis,value,p_one,shannon,min_entropy,p1_model,p2_model"
    );
    assert_eq!(lines.count(), 2 * 11);
}

#[test]
fn bench_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("b.csv");
    let json_path = dir.path().join("b.json");
    ok(&[
        "bench",
        "--paths",
        "100,1000",
        "--seed",
        "4",
        "--out",
        path_str(&csv_path),
    ]);
    ok(&[
        "bench",
        "--paths",
        "100,1000",
        "--seed",
        "4",
        "--out",
        path_str(&json_path),
    ]);
    assert_eq!(
        fs::read_to_string(&csv_path).unwrap().lines().count(),
        1 + 6
    );
    let j = read_json(&json_path);
    assert_eq!(j["seed"], 4);
    let rows = j["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["price"].as_f64().unwrap() > 0.0));
}
