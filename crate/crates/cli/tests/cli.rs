use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn pkcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pkcert"))
        .args(args)
        .current_dir(root())
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SQUARE: &str = r#"
name = "square"
cases = ["PoincareE"]

[domain]
generator = "unit_square"
cells = 4

[region]
box = [[0.0, 0.0], [0.5, 0.5]]

[degrees]
scalar = 6
vector = 4

[trials]
count = 200
seed = 2
"#;

#[test]
fn quarter_region_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sq.toml", SQUARE);
    let out = pkcert(&["certify", "-c", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["command"], "certify");
    assert_eq!(doc["passed"], true);
    let case = &doc["scenarios"][0]["cases"][0];
    assert_eq!(case["status"], "pass");
    assert_eq!(case["report"]["passed"], true);
    let keys: Vec<&String> = doc.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["schema_version", "command", "scenarios", "passed", "timing"]);
}

#[test]
fn flat_edge_records_the_error_and_continues() {
    let out = pkcert(&["certify", "-c", "configs/flat_edge.toml"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    let cases = doc["scenarios"][0]["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 3);
    assert_eq!(cases[0]["status"], "error");
    assert!(cases[0]["error"].as_str().unwrap().contains("flat"));
    assert_eq!(cases[1]["status"], "pass");
    assert_eq!(cases[2]["status"], "pass");
}

#[test]
fn empty_case_list_gives_geometry_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "e.toml", &SQUARE.replace(r#"cases = ["PoincareE"]"#, "cases = []"));
    let out = pkcert(&["certify", "-c", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let sc = &doc["scenarios"][0];
    assert!(sc.get("cases").is_none());
    assert!((sc["geometry"]["measure"].as_f64().unwrap() - 1.0).abs() < 1e-14);
    assert!((sc["geometry"]["region_measure"].as_f64().unwrap() - 0.25).abs() < 1e-14);
}

#[test]
fn invalid_configs_exit_with_usage_status() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        SQUARE.replace("seed = 2", ""),
        SQUARE.replace("scalar = 6", "scalar = 0"),
        SQUARE.replace("PoincareE", "PoincareX"),
        format!("{SQUARE}\n[portion]\ntags = [\"nowhere\"]\n"),
        SQUARE.replace("cells = 4", "cells = \"four\""),
    ] {
        let cfg = write(dir.path(), "bad.toml", &bad);
        let out = pkcert(&["certify", "-c", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(out.stdout.is_empty());
    }
    // the seed may come from the command line
    let cfg = write(dir.path(), "noseed.toml", &SQUARE.replace("seed = 2", ""));
    assert_eq!(pkcert(&["certify", "-c", &cfg, "--seed", "4"]).status.code(), Some(0));
    assert_eq!(pkcert(&["bounds", "-c", &cfg]).status.code(), Some(0));
}

#[test]
fn malformed_mesh_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.mesh", "v 0 0\nv 1 0\nt 0 1 7\n");
    let cfg = write(
        dir.path(),
        "m.toml",
        "cases = []\n[domain]\ngenerator = \"mesh_file\"\npath = \"m.mesh\"\n",
    );
    let out = pkcert(&["bounds", "-c", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mesh"));
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let args = ["certify", "-c", "configs/demo.toml", "--trials", "100", "--degree", "4"];
    let j = json(&pkcert(&args));
    let c = pkcert(&[&args[..], &["--format", "csv"]].concat());
    let mut reader = csv::Reader::from_reader(&c.stdout[..]);
    let headers = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let cases = j["scenarios"][0]["cases"].as_array().unwrap();
    assert_eq!(rows.len(), cases.len());
    for (row, case) in rows.iter().zip(cases) {
        for key in ["norm_t", "sup_ratio", "random_max", "composed_bound", "paper_bound"] {
            let col = headers.iter().position(|h| h == key).unwrap();
            let from_csv: f64 = row[col].parse().unwrap();
            assert_eq!(from_csv.to_bits(), case["report"][key].as_f64().unwrap().to_bits(), "{key}");
        }
    }
}

#[test]
fn compare_mode_detects_changes() {
    let dir = tempfile::tempdir().unwrap();
    let stored = dir.path().join("stored.json");
    let stored = stored.to_str().unwrap();
    let cfg = write(dir.path(), "sq.toml", SQUARE);
    assert_eq!(pkcert(&["certify", "-c", &cfg, "-o", stored]).status.code(), Some(0));
    let again = pkcert(&["certify", "-c", &cfg, "--compare", stored]);
    assert_eq!(again.status.code(), Some(0));
    let other_seed = pkcert(&["certify", "-c", &cfg, "--seed", "3", "--compare", stored]);
    assert_eq!(other_seed.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&other_seed.stderr).contains("random_max"));
}

#[test]
fn rho_sweep_on_the_disk() {
    let out = pkcert(&["sweep", "-c", "configs/ball.toml", "--sweep", "rho=0.3:0.7:3", "--trials", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let rows = doc["sweep"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for (i, rho) in [0.3, 0.5, 0.7].iter().enumerate() {
        for row in &rows[2 * i..2 * i + 2] {
            assert!((row["value"].as_f64().unwrap() - rho).abs() < 1e-15);
            let t = row["norm_t"].as_f64().unwrap();
            assert!(t >= 1.0 - 1e-10 && t <= 1.25f64.sqrt() / rho + 1e-9, "{row}");
            assert_eq!(row["status"], "pass");
        }
    }
}

#[test]
fn korn_ball_sweep_point_in_three_dimensions() {
    let out = pkcert(&[
        "sweep", "-c", "configs/ball3.toml", "--sweep", "rho=0.5:0.5:1", "--case", "KornBalls", "--trials", "100",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let row = &json(&out)["sweep"][0];
    // sqrt(6/5) 2^(3/2)
    assert!(row["norm_t"].as_f64().unwrap() <= 3.0983867 + 1e-7);
}

#[test]
fn degree_sweep_gives_nondecreasing_q() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sq.toml", SQUARE);
    let out = pkcert(&["sweep", "-c", &cfg, "--sweep", "degree=2:8:4"]);
    assert_eq!(out.status.code(), Some(0));
    let q: Vec<f64> = json(&out)["sweep"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["q"].as_f64().unwrap())
        .collect();
    assert_eq!(q.len(), 4);
    assert!(q.windows(2).all(|w| w[1] >= w[0]), "{q:?}");
}

#[test]
fn sweep_parameter_mismatch() {
    let out = pkcert(&["sweep", "-c", "configs/demo.toml", "--sweep", "rho=0.3:0.7:3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));
}

#[test]
fn check_flat_verdicts() {
    let out = pkcert(&["check-flat", "-c", "configs/flat_edge.toml"]);
    assert_eq!(out.status.code(), Some(0));
    let check = &json(&out)["scenarios"][0]["flat_check"];
    assert_eq!(check["flat"], true);
    assert_eq!(check["counterexample"]["passed"], true);
    assert_eq!(check["affine_injectivity"]["injective"], false);
    assert_eq!(check["rigid_injectivity"]["injective"], true);
    let out = pkcert(&["check-flat", "-c", "configs/l_shape.toml"]);
    let check = &json(&out)["scenarios"][0]["flat_check"];
    assert_eq!(check["flat"], false);
    assert!(check.get("counterexample").is_none());
}

#[test]
fn demo_runs_every_built_in_scenario() {
    let out = pkcert(&["demo", "--trials", "100", "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let names: Vec<&str> = doc["scenarios"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        ["square_quarter", "square_edge", "square_two_edges", "ball2_rho_0.5", "ball3_rho_0.5", "l_shape"]
    );
}

#[test]
fn output_file_and_format_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let out = pkcert(&["bounds", "-c", "configs/demo.toml", "-o", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("scenario,parameter,value,case,status"));
    assert_eq!(text.lines().count(), 8);
}
