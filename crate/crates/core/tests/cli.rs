use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbound"))
        .args(args)
        .env_remove("QBOUND_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn close(v: &Value, x: f64) -> bool {
    (v.as_f64().unwrap() - x).abs() < 1e-11
}

#[test]
fn maximally_mixed_qutrit_is_valid() {
    let dir = tempfile::tempdir().unwrap();
    let third = 1.0 / 3.0;
    let text = format!("{third},0,0\n0,{third},0\n0,0,{third}\n");
    let f = write(dir.path(), "mixed.csv", &text);
    let out = qbound(&["validate-state", &f]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "valid");
    let s = v["s"].as_array().unwrap();
    assert!(close(&s[0], 1.0) && close(&s[1], 1.0 / 3.0) && close(&s[2], 1.0 / 27.0));
}

#[test]
fn indefinite_matrix_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.json", r#"{"dim": 2, "entries": [[1.5, 0], [0, 0], [0, 0], [-0.5, 0]]}"#);
    let out = qbound(&["validate-state", &f]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "invalid");
    assert!(close(&v["s"][1], -0.75));
    assert_eq!(v["violation"]["n"], 2);
}

#[test]
fn malformed_input_exits_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "broken.csv", "0.5,0\n0,half\n");
    let out = qbound(&["validate-state", &f]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":2:3:"), "{err}");
    assert_eq!(qbound(&["validate-state", "/nonexistent/file.csv"]).status.code(), Some(2));
}

#[test]
fn qc_reports_explicit_terms() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "pure.csv", "1,0,0\n0,0,0\n0,0,0\n");
    let out = qbound(&["qc", &f]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(close(&v["explicit"]["s2"], 0.0));
    assert!(close(&v["explicit"]["s3"], 0.0));
    assert!(close(&v["weyl_tr2"], 1.0));
    assert!(close(&v["weyl_tr3"], 1.0));
}

#[test]
fn membership_verdicts() {
    let out = qbound(&["membership", "--set", "fig1", "--point", "0.8,0.8"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["closed_form"]["inside"], false);

    let out = qbound(&["membership", "--set", "fig1", "--point", "0,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["closed_form"]["inside"], true);

    let out = qbound(&["membership", "--set", "qubit-axes", "--dots", "0.5,0,0", "--point", "-0.9,0.3,0.2"]);
    let v = json(&out);
    assert_eq!(v["inside"], v["closed_form"]["inside"]);

    let out = qbound(&["membership", "--set", "spin", "--two-j", "2", "--point", "0.6,-0.6,0.6"]);
    assert_eq!(out.status.code(), Some(1));

    let out = qbound(&["membership", "--set", "weyl", "--dim", "3", "--point", "0,0,0,0,0,0,0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn catalog_single_entry() {
    let out = qbound(&["catalog", "--only", "spin1.H"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let r = &v[0];
    assert_eq!(r["name"], "spin1.H");
    assert_eq!(r["pass"], true);
    assert!((r["computed"].as_f64().unwrap() - 6.0 * 2f64.ln()).abs() < 1e-6);
}

#[test]
fn catalog_entropy_witnesses_as_csv() {
    let out = qbound(&["catalog", "--only", "sic.entropy", "--witnesses", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("sic.entropy,") && l.split(',').count() == 4).collect();
    assert_eq!(rows.len(), 4, "{text}");
    assert!(text.lines().nth(1).unwrap().ends_with(",4,true"));
}

#[test]
fn catalog_unknown_name() {
    assert_eq!(qbound(&["catalog", "--only", "spin9.H"]).status.code(), Some(2));
    let out = qbound(&["catalog", "--list"]);
    assert!(String::from_utf8(out.stdout).unwrap().lines().any(|l| l == "mub3.quadratic"));
}

#[test]
fn mub_prime_and_composite() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ket0.csv", "1,0,0\n0,0,0\n0,0,0\n");
    let out = qbound(&["mub", "--dim", "3", "--state", &f]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["bases"].as_array().unwrap().len(), 4);
    assert!(v["unbiasedness_deviation"].as_f64().unwrap() < 1e-10);
    assert!(close(&v["quadratic"], 2.0));

    let out = qbound(&["mub", "--dim", "6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not prime"));
}

#[test]
fn seed_changes_random_state() {
    let a = json(&qbound(&["mub", "--dim", "3", "--seed", "1"]));
    let b = json(&qbound(&["mub", "--dim", "3", "--seed", "1"]));
    let c = json(&qbound(&["mub", "--dim", "3", "--seed", "2"]));
    assert_eq!(a["quadratic"], b["quadratic"]);
    assert_ne!(a["quadratic"], c["quadratic"]);
}

#[test]
fn dump_set_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = qbound(&["dump-set", "--set", "spin1-nine"]);
    assert_eq!(out.status.code(), Some(0));
    let f = dir.path().join("nine.json");
    fs::write(&f, &out.stdout).unwrap();
    let sel = format!("file:{}", f.display());
    let again = qbound(&["dump-set", "--set", &sel]);
    assert_eq!(out.stdout, again.stdout);

    let point = "0,0,0,0,0,0,0.5,0.5,1";
    let a = json(&qbound(&["membership", "--set", "spin1-nine", "--point", point]));
    let b = json(&qbound(&["membership", "--set", &sel, "--point", point]));
    assert_eq!(a["inside"], b["inside"]);
    assert_eq!(a["margin"], b["margin"]);
}

#[test]
fn region_exports() {
    let dir = tempfile::tempdir().unwrap();
    let boundary = dir.path().join("b.csv");
    let grid = dir.path().join("g.csv");
    let out = qbound(&[
        "region",
        "--set",
        "qubit-axes",
        "--dots",
        "0.5,0,0",
        "--directions",
        "50",
        "--boundary",
        boundary.to_str().unwrap(),
        "--grid",
        grid.to_str().unwrap(),
        "--measure",
        "H",
        "--bound",
        "1.2",
        "--resolution",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["grid"]["in_E_not_R"], 0);
    let b = fs::read_to_string(boundary).unwrap();
    assert_eq!(b.lines().next().unwrap(), "dir_1,dir_2,dir_3,touch_1,touch_2,touch_3,support");
    assert_eq!(b.lines().count(), 51);
    let g = fs::read_to_string(grid).unwrap();
    assert_eq!(g.lines().next().unwrap(), "x,y,z,in_E,in_R");
    assert_eq!(g.lines().count(), 1 + 12 * 12 * 12);

    let out = qbound(&["region", "--set", "spin1-nine"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qbound(&["region", "--set", "fig1", "--grid", "x.csv"]);
    assert_eq!(out.status.code(), Some(2));
}
