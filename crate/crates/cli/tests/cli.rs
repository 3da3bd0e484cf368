use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const A: &str = r#"{"rows":4,"cols":4,"data":[
  [0,0],[1,0],[0,0],[0,0],
  [0,0],[0,0],[1,0],[0,0],
  [0,0],[0,0],[0,0],[0,0],
  [0,0],[0,0],[0,0],[0,0]]}"#;

const B: &str = r#"{"rows":4,"cols":4,"data":[
  [0,0],[1,0],[0,0],[0,0],
  [0,0],[0,0],[0,0],[0,0],
  [0,0],[0,0],[0,0],[1,0],
  [0,0],[0,0],[0,0],[0,0]]}"#;

// compressed shift on K_{z^3}, defect one
const S3: &str = r#"{"rows":3,"cols":3,"data":[
  [0,0],[0,0],[0,0],
  [1,0],[0,0],[0,0],
  [0,0],[1,0],[0,0]]}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pimodel"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn report(args: &[&str], cwd: &Path) -> Value {
    let out = run(args, cwd);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    write(&dir, "a.json", A);
    write(&dir, "b.json", B);
    write(&dir, "s3.json", S3);
    dir
}

#[test]
fn analyze_defect_two_operator() {
    let dir = setup();
    let r = report(&["analyze", "a.json"], dir.path());
    let res = &r["result"];
    assert_eq!(res["valid"], true);
    assert_eq!(res["indices"], serde_json::json!([2, 2]));
    assert_eq!(res["cnu"], true);
    let spectrum = res["spectrum"].as_array().unwrap();
    assert_eq!(spectrum.len(), 4);
    for z in spectrum {
        let p = z.as_array().unwrap();
        assert!(p[0].as_f64().unwrap().hypot(p[1].as_f64().unwrap()) < 1e-8);
    }
}

#[test]
fn analyze_reports_invalid_matrix() {
    let dir = setup();
    write(&dir, "n.json", r#"{"rows":1,"cols":1,"data":[[0.5,0]]}"#);
    let r = report(&["analyze", "n.json"], dir.path());
    assert_eq!(r["result"]["valid"], false);
    assert!(r["result"]["residual"].as_f64().unwrap() > 0.3);
}

#[test]
fn compare_same_polynomial_different_jordan_forms() {
    let dir = setup();
    let r = report(&["compare", "a.json", "b.json"], dir.path());
    let res = &r["result"];
    assert_eq!(res["coincide"]["outcome"], "not_coincident");
    assert_eq!(res["hm"], false);
    assert_eq!(res["leq"]["outcome"], "fails");
    // index two: unitary equivalence via polynomials does not apply
    assert!(res["sim"].is_null());
    assert_eq!(res["sim_q"]["outcome"], "fails");
}

#[test]
fn compare_with_itself() {
    let dir = setup();
    let r = report(&["compare", "s3.json", "s3.json"], dir.path());
    let res = &r["result"];
    assert_eq!(res["hm"], true);
    assert_eq!(res["leq"]["outcome"], "holds");
    assert_eq!(res["leq_q"]["outcome"], "holds");
    assert_eq!(res["coincide"]["outcome"], "coincident");
    assert_eq!(res["sim"], true);
    assert_eq!(res["sim_q"]["outcome"], "holds");
}

#[test]
fn compare_rejects_too_few_samples() {
    let dir = setup();
    let out = run(
        &["compare", "a.json", "b.json", "--samples", "5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn blaschke_identity_function() {
    let dir = setup();
    write(&dir, "z.json", r#"{"zeros":[[0,0]],"constant":[1,0]}"#);
    let r = report(&["blaschke", "z.json"], dir.path());
    let res = &r["result"];
    assert_eq!(res["degree"], 1);
    assert_eq!(res["model_operator"]["matrix"]["rows"], 1);
    assert!(res["gram_residual"].as_f64().unwrap() < 1e-12);
    for s in res["samples"].as_array().unwrap() {
        let z = s["z"].as_array().unwrap();
        let w = s["w"].as_array().unwrap();
        for k in 0..2 {
            let gap = z[k].as_f64().unwrap() - w[k].as_f64().unwrap();
            assert!(gap.abs() < 1e-12, "w(z) = z fails at {z:?}");
        }
    }
}

#[test]
fn clark_round_trips() {
    let dir = setup();
    write(
        &dir,
        "mu.json",
        r#"{"atoms":[{"zeta":[1,0],"weight":0.5},{"zeta":[-1,0],"weight":0.5}]}"#,
    );
    write(&dir, "b.json", r#"{"zeros":[[0,0],[0.5,0.2]]}"#);
    for input in ["mu.json", "b.json"] {
        let r = report(&["clark", input], dir.path());
        assert!(r["result"]["round_trip_distance"].as_f64().unwrap() < 1e-8);
        assert!(r["result"]["poisson_residual"].as_f64().unwrap() < 1e-8);
    }
    let r = report(&["clark", "--carrier", "1,2"], dir.path());
    assert!(r["result"]["isometry_residual"].as_f64().unwrap() < 1e-4);
}

#[test]
fn kernels_identities_and_margins() {
    let dir = setup();
    let r = report(&["kernels", "a.json"], dir.path());
    let res = &r["result"];
    assert!(res["kernel_gap"].as_f64().unwrap() < 1e-8);
    assert!(res["multiplier_gap"].as_f64().unwrap() < 1e-8);
    for (_, m) in res["psd_margins"].as_object().unwrap() {
        let scale = m["norm"].as_f64().unwrap();
        assert!(m["min_eigenvalue"].as_f64().unwrap() >= -1e-10 * scale);
    }
}

#[test]
fn reports_are_byte_identical() {
    let dir = setup();
    for args in [
        &["compare", "a.json", "b.json", "--seed", "7"][..],
        &["charfn", "s3.json"],
        &["kernels", "s3.json"],
    ] {
        let first = run(args, dir.path());
        let second = run(args, dir.path());
        assert!(first.status.success());
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn echoes_tolerances_and_seed() {
    let dir = setup();
    let r = report(
        &[
            "analyze",
            "a.json",
            "--tol-rank",
            "1e-7",
            "--tol-res",
            "1e-6",
            "--seed",
            "42",
        ],
        dir.path(),
    );
    assert_eq!(r["seed"], 42);
    assert_eq!(r["tolerances"]["rank_eps"], 1e-7);
    assert_eq!(r["tolerances"]["residual_eps"], 1e-6);
    assert_eq!(r["command"], "analyze");
}

#[test]
fn per_file_tolerance_overrides() {
    let dir = setup();
    write(
        &dir,
        "t.json",
        r#"{"rows":1,"cols":1,"data":[[0,0]],"tol":{"residual_eps":1e-5}}"#,
    );
    let r = report(&["analyze", "t.json"], dir.path());
    assert_eq!(r["inputs"]["tol"]["residual_eps"], 1e-5);
    assert_eq!(r["tolerances"]["residual_eps"], 1e-8);
}

#[test]
fn input_errors_exit_two() {
    let dir = setup();
    write(&dir, "syntax.json", r#"{"rows":2,"cols":2,"data":[[1,0]"#);
    write(&dir, "schema.json", r#"{"rows":2,"cols":"two","data":[]}"#);
    write(&dir, "count.json", r#"{"rows":2,"cols":2,"data":[[1,0]]}"#);
    write(&dir, "disk.json", r#"{"zeros":[[1.5,0]]}"#);
    for args in [
        &["analyze", "syntax.json"][..],
        &["analyze", "schema.json"],
        &["analyze", "count.json"],
        &["analyze", "missing.json"],
        &["blaschke", "disk.json"],
        &["analyze", "a.json", "--tol-rank", "-1"],
        &["analyze", "a.json", "--format", "csv"],
        &["frobnicate"],
    ] {
        let out = run(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = run(&["analyze", "syntax.json"], dir.path());
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 1"), "{msg}");
    let out = run(&["blaschke", "schema.json"], dir.path());
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("zeros"), "{msg}");
}

#[test]
fn csv_series() {
    let dir = setup();
    let out = run(
        &["charfn", "a.json", "--format", "csv", "--samples", "9"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["re", "im", "abs", "sv1", "sv2"]
    );
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for row in rows {
        // contractive, and the largest singular value is |z| for this operator
        assert!(row[3] <= 1.0 && row[4] <= row[3]);
        assert!((row[3] - row[2]).abs() < 1e-10);
    }
}

#[test]
fn output_file() {
    let dir = setup();
    let out = run(
        &["analyze", "s3.json", "--output", "report.json"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r["result"]["indices"], serde_json::json!([1, 1]));
}

#[test]
fn charfn_routes_agree_in_singular_values() {
    let dir = setup();
    let ext = report(&["charfn", "a.json"], dir.path());
    let def = report(&["charfn", "a.json", "--route", "defect"], dir.path());
    let sv = |r: &Value| -> Vec<f64> {
        r["result"]["samples"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|s| s["singular_values"].as_array().unwrap().clone())
            .map(|x| x.as_f64().unwrap())
            .collect()
    };
    for (x, y) in sv(&ext).iter().zip(sv(&def)) {
        assert!((x - y).abs() < 1e-10);
    }
}
