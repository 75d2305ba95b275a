use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hopf_lck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopf-lck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn entry(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn verify_example1_passes() {
    let out = hopf_lck(&["verify", "--entry", "example1", "--points", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let reports = doc.as_array().unwrap();
    assert!(reports.iter().all(|r| r["status"] == "pass"));
    assert!(reports
        .iter()
        .all(|r| r["num_points"] == 200 || r["check_name"] == "contraction"));
}

#[test]
fn zero_points_is_a_config_error() {
    let out = hopf_lck(&["verify", "--entry", "example1", "--points", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("points"), "{err}");
}

#[test]
fn unknown_config_key_lists_valid_keys() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "run.json",
        r#"{"entry": "example1", "pointz": 10}"#,
    );
    let out = hopf_lck(&["verify", "--file", &f]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("pointz") && err.contains("points") && err.contains("seed"),
        "{err}"
    );
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "run.json",
        r#"{"entry": "example1", "points": 50, "seed": 7, "parameters": {"mu": [1.5, 0.5]}}"#,
    );
    let target = dir.path().join("report.json");
    let out = hopf_lck(&["verify", "--file", &f, "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(doc[0]["seed"], 7);
}

#[test]
fn kodaira_verify_fails_homothety() {
    let out = hopf_lck(&["verify", "--entry", "kodaira", "--points", "100"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    let failing: Vec<&str> = doc
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["status"] == "fail")
        .map(|r| r["check_name"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["potential_homothety"]);
}

#[test]
fn deform_diagonalize_jordan_block() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "j.json", "[[0.5, 1], [0, 0.5]]");
    let out = hopf_lck(&[
        "deform",
        "--file",
        &f,
        "--family",
        "diagonalize",
        "--t",
        "0.25",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let m = &doc["matrix_at_t"];
    assert_eq!(entry(&m[0][0]), (0.5, 0.0));
    assert_eq!(entry(&m[0][1]), (0.25, 0.0));
    assert_eq!(entry(&m[1][0]), (0.0, 0.0));
    assert_eq!(doc["limit_matches_diagonal"], true);
}

#[test]
fn deform_linearize_quadratic_map() {
    let dir = tempfile::tempdir().unwrap();
    // (z1/2 + z2², z2/2)
    let f = write(
        dir.path(),
        "g.json",
        r#"{"dim": 2, "components": [
            [{"monomial": [1, 0], "coeff": [0.5, 0]}, {"monomial": [0, 2], "coeff": [1, 0]}],
            [{"monomial": [0, 1], "coeff": [0.5, 0]}]
        ]}"#,
    );
    let out = hopf_lck(&["deform", "--file", &f, "--family", "linearize", "--t", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let comps = doc["map_at_t"]["components"].as_array().unwrap();
    assert_eq!(comps[0].as_array().unwrap().len(), 1);
    assert_eq!(comps[0][0]["monomial"], serde_json::json!([1, 0]));
    assert_eq!(entry(&comps[0][0]["coeff"]), (0.5, 0.0));
    assert_eq!(doc["limit_matches_linear_part"], true);

    let out = hopf_lck(&[
        "deform",
        "--file",
        &f,
        "--family",
        "linearize",
        "--t",
        "0.5",
    ]);
    let doc = json(&out);
    let quad = doc["map_at_t"]["components"][0]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["monomial"] == serde_json::json!([0, 2]))
        .unwrap()
        .clone();
    assert_eq!(entry(&quad["coeff"]), (0.5, 0.0));
}

#[test]
fn jordan_of_block() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "j.json", "[[0.5, 1], [0, 0.5]]");
    let out = hopf_lck(&["jordan", "--file", &f]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["status"], "ok");
    assert_eq!(doc["blocks"].as_array().unwrap().len(), 1);
    assert_eq!(doc["blocks"][0]["size"], 2);
}

#[test]
fn contraction_iteration_count() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "d.json", "[[0.5, 0], [0, 0.5]]");
    let out = hopf_lck(&[
        "contraction",
        "--file",
        &f,
        "--radius",
        "2",
        "--eps",
        "1e-6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["is_contraction"], true);
    assert_eq!(doc["iterations_needed"], 21);

    let f = write(dir.path(), "e.json", "[[1.2, 0], [0, 0.5]]");
    let out = hopf_lck(&["contraction", "--file", &f]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["is_contraction"], false);
}

#[test]
fn solve_lee_matches_displayed_theta() {
    let out = hopf_lck(&["solve-lee", "--entry", "example1", "--points", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert!(doc["max_residual"].as_f64().unwrap() < 1e-9);
    assert!(doc["max_theta_gap"].as_f64().unwrap() < 1e-9);
}

#[test]
fn missing_file_is_a_config_error() {
    let out = hopf_lck(&["jordan", "--file", "/nonexistent/m.json"]);
    assert_eq!(out.status.code(), Some(2));
}
