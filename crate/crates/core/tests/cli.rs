// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn povmsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_povmsim")).args(args).env_remove("POVMSIM_OUT_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn simulate_tetrahedral_success_rate() {
    let o = povmsim(&["simulate", "--povm", "tetrahedral", "--state", "zero", "--shots", "1000000", "--seed", "7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# seed: 7"));
    assert!(text.contains("# config_hash: "));
    let table = rows(&text);
    let success = table.iter().find(|r| r[0] == "success").unwrap();
    let rate: f64 = success[3].parse().unwrap();
    assert!((rate - 0.5).abs() < 5.0 * (0.25f64 / 1e6).sqrt());
}

#[test]
fn simulate_trivial_single_outcome() {
    let o = povmsim(&["simulate", "--povm", "trivial", "--shots", "1000"]);
    assert!(o.status.success());
    let table = rows(&stdout(&o));
    assert_eq!(table.len(), 2);
    assert_eq!(table[0][3], "1.000000");
}

#[test]
fn usage_errors_exit_two() {
    let o = povmsim(&["simulate", "--povm", "missing"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trine"));
    assert_eq!(povmsim(&["usd", "--symmetric", "3", "0"]).status.code(), Some(2));
    assert_eq!(povmsim(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(povmsim(&["usd"]).status.code(), Some(2));
}

#[test]
fn usd_symmetric_row() {
    let o = povmsim(&["usd", "--symmetric", "8", "0.05"]);
    assert!(o.status.success());
    let table = rows(&stdout(&o));
    let ratio: f64 = table[0][4].parse().unwrap();
    assert!((7.6..=8.0).contains(&ratio));
    assert_eq!(table[0][7], "true");
}

#[test]
fn usd_random_json_summary() {
    let o = povmsim(&["--format", "json", "usd", "--random", "50", "100", "--trials", "200", "--seed", "1"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["seed"], 1);
    assert_eq!(doc["result"]["rows"].as_array().unwrap().len(), 200);
    let mean = doc["result"]["lambda_min"]["mean"].as_f64().unwrap();
    assert!(mean > 0.0 && mean < 1.0);
}

#[test]
fn table1_rows() {
    let o = povmsim(&["table1"]);
    assert!(o.status.success());
    let table = rows(&stdout(&o));
    let want = [("Tetrahedral", 0.117, 0.023), ("Trine", 0.141, 0.022), ("Random 4-effect", 0.168, 0.031)];
    for ((name, nm, ps), row) in want.iter().zip(&table) {
        assert_eq!(&row[0], name);
        assert!((row[1].parse::<f64>().unwrap() - nm).abs() <= 0.003);
        assert!((row[2].parse::<f64>().unwrap() - ps).abs() <= 0.003);
    }
}

#[test]
fn compare_reports_both_schemes() {
    let o = povmsim(&["compare", "--povm", "trine", "--seed", "2"]);
    assert!(o.status.success());
    let table = rows(&stdout(&o));
    let d = |scheme: &str| table.iter().find(|r| r[0] == scheme).unwrap()[1].parse::<f64>().unwrap();
    assert!(d("postselection") < d("naimark"));
    let nm = table.iter().find(|r| r[0] == "naimark").unwrap();
    assert_eq!(nm[2], "4");
    assert!(nm[5].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn outputs_are_reproducible() {
    let args = ["--format", "json", "compare", "--povm", "random4", "--seed", "5", "--shots", "1024"];
    let (a, b) = (povmsim(&args), povmsim(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_and_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "seed = 9\nshots = 512\nscheme = \"postselection\"\npovm_fixture = \"trine\"\n\
         [noise]\ncnot = 0.1\nsu2 = 0.0\nreadout_bias = 0.0\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_povmsim"))
        .args(["--config", config.to_str().unwrap(), "--format", "json", "compare", "--seed", "1"])
        .env("POVMSIM_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("compare.json")).unwrap()).unwrap();
    assert_eq!(doc["seed"], 9);
    assert_eq!(doc["config"]["povm"], "trine");
    assert_eq!(doc["config"]["noise"]["cnot_depolarizing"], 0.1);
    assert!(doc["result"]["runs"]["naimark"].is_null());
    assert_eq!(doc["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn explicit_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/fixtures.csv");
    let o = povmsim(&["-o", path.to_str().unwrap(), "fixtures"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("tetrahedral,2,4,true"));
}

#[test]
fn measurement_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.json");
    let doc = r#"{"dim": 2, "effects": [[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]]}"#;
    std::fs::write(&path, doc).unwrap();
    let o = povmsim(&["--format", "json", "naimark", "--povm", path.to_str().unwrap(), "--mode", "abstract"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["extended_dim"], 2);
    assert!(v["config"]["povm_digest"].is_string());

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dim": 2, "effects": [[[[1,0],[0,0]],[[0,0],[0,0]]]]}"#).unwrap();
    assert_eq!(povmsim(&["scheme", "--povm", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn ensemble_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.json");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let doc = format!(
        r#"{{"states": [{{"dim": 2, "vector": [[1,0],[0,0]]}}, {{"dim": 2, "vector": [[{h},0],[{h},0]]}}], "probs": [0.5, 0.5]}}"#
    );
    std::fs::write(&path, doc).unwrap();
    let o = povmsim(&["usd", "--ensemble", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&stdout(&o));
    let lambda: f64 = table[0][2].parse().unwrap();
    assert!((lambda - (1.0 - h)).abs() < 1e-6);
    assert_eq!(table[0][7], "true");
    assert!(Path::new(&path).exists());
}
