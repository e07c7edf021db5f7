use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn equilib(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equilib"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).expect("valid schema")
}

fn assert_valid(validator: &jsonschema::Validator, doc: &Value) {
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}");
}

fn write_spectrum(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SPECTRUM: &str = r#"{"d_S": 2, "d_B": 2, "levels": [{"E": 0.0}, {"E": 0.37}, {"E": 1.06}, {"E_num": 191, "E_den": 100}]}"#;

#[test]
fn gram_reports_multiplicities() {
    let out = equilib(&["gram", "--n", "4", "--d", "4"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["k"], serde_json::json!([35, 1, 20, 15, 45]));
    assert_eq!(v["singular"], false);
    assert_eq!(v["trace"], "6144");
    assert_eq!(v["minpoly_inverse_agrees"], true);
    assert_valid(&schema("gram.schema.json"), &v);
}

#[test]
fn gram_flags_singular_matrices() {
    let out = equilib(&["gram", "--n", "3", "--d", "2"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["singular"], true);
    assert_eq!(v["k"], serde_json::json!([4, 0, 2]));
    assert_valid(&schema("gram.schema.json"), &v);
}

#[test]
fn argument_errors_exit_two() {
    assert_eq!(equilib(&["gram", "--n", "5", "--d", "2"]).status.code(), Some(2));
    assert_eq!(equilib(&["gram", "--n", "4"]).status.code(), Some(2));
    assert_eq!(equilib(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(equilib(&["validate", "--check", "nope"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let s = write_spectrum(dir.path(), "s.json", SPECTRUM);
    let s = s.to_str().unwrap();
    assert_eq!(equilib(&["sweep", "--spectrum", s, "--t-min", "2", "--t-max", "1"]).status.code(), Some(2));
    assert_eq!(equilib(&["sweep", "--spectrum", s, "--steps", "0"]).status.code(), Some(2));
    assert_eq!(equilib(&["sweep", "--spectrum", s, "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn malformed_spectrum_files_exit_three_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_spectrum(dir.path(), "bad.json", "{\"d_S\": 2,\n \"d_B\": 2,\n \"levels\": [{\"E\": oops}]}");
    let out = equilib(&["sweep", "--spectrum", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let wrong = write_spectrum(
        dir.path(),
        "wrong.json",
        r#"{"d_S": 2, "d_B": 2, "levels": [{"E": 0.0, "deg": 3}, {"E": 1.0, "deg": 2}]}"#,
    );
    let out = equilib(&["sweep", "--spectrum", wrong.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let missing = dir.path().join("missing.json");
    assert_eq!(equilib(&["sweep", "--spectrum", missing.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(equilib(&["validate", "--spectrum", bad.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn analytic_sweep_has_one_row_per_step_and_empty_mc_columns() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_spectrum(dir.path(), "s.json", SPECTRUM);
    let out = equilib(&["sweep", "--spectrum", s.to_str().unwrap(), "--steps", "7", "--samples", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,exact,leading_order,mc_mean,mc_stderr");
    assert_eq!(lines.len(), 1 + 7);
    for l in &lines[1..] {
        let cells: Vec<&str> = l.split(',').collect();
        assert_eq!(cells.len(), 5);
        assert!(cells[3].is_empty() && cells[4].is_empty());
        let exact: f64 = cells[1].parse().unwrap();
        assert!((0.0..=2.0).contains(&exact));
    }
}

#[test]
fn sweep_output_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_spectrum(dir.path(), "s.json", SPECTRUM);
    let run = |name: &str, seed: &str, format: &str| {
        let out = dir.path().join(name);
        let status = equilib(&[
            "sweep",
            "--spectrum",
            s.to_str().unwrap(),
            "--steps",
            "5",
            "--samples",
            "300",
            "--seed",
            seed,
            "--format",
            format,
            "--out",
            out.to_str().unwrap(),
        ])
        .status;
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv", "9", "csv"), run("b.csv", "9", "csv"));
    assert_ne!(run("c.csv", "9", "csv"), run("d.csv", "10", "csv"));
    let a = run("a.json", "9", "json");
    assert_eq!(a, run("b.json", "9", "json"));
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_valid(&schema("sweep.schema.json"), &v);
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn monte_carlo_columns_agree_with_the_exact_column() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_spectrum(dir.path(), "s.json", SPECTRUM);
    let out = equilib(&["sweep", "--spectrum", s.to_str().unwrap(), "--steps", "4", "--samples", "2000"]);
    assert!(out.status.success());
    for l in String::from_utf8(out.stdout).unwrap().lines().skip(1) {
        let v: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((v[1] - v[3]).abs() <= 4.0 * v[4], "{l}");
    }
}

#[test]
fn gaussian_sweep_decays_on_the_inverse_log_d_time_scale() {
    let dir = tempfile::tempdir().unwrap();
    let levels: Vec<String> = (0..16).map(|k| format!("{{\"E\": {}}}", k as f64 * 0.1)).collect();
    let s = write_spectrum(
        dir.path(),
        "g.json",
        &format!("{{\"d_S\": 2, \"d_B\": 8, \"levels\": [{}]}}", levels.join(",")),
    );
    let sigma = 16f64.ln();
    let t_max = format!("{}", 3.0 / sigma);
    let out = equilib(&[
        "sweep", "--spectrum", s.to_str().unwrap(), "--mode", "gaussian", "--t-max", &t_max, "--steps", "13",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&schema("sweep.schema.json"), &v);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 13);
    let col = |r: &Value, i: usize| r[i].as_f64().unwrap();
    let first = &rows[0];
    let last = &rows[12];
    // Time-dependent part, measured from the t → ∞ floor.
    let floor = equilib_core::equilibrium::gaussian_terms(&[1; 16], 2, sigma, 0.0).unwrap().constant;
    let decay = (col(last, 1) - floor) / (col(first, 1) - floor);
    assert!(decay < (-4.0f64).exp(), "decay {decay}");
    let mut prev = f64::INFINITY;
    for r in rows {
        assert!(col(r, 3) <= col(r, 1) && col(r, 1) <= col(r, 2) + 1e-12);
        assert!(col(r, 1) <= prev + 1e-15);
        prev = col(r, 1);
    }
}

#[test]
fn validate_filters_by_check_name_and_emits_a_schema_valid_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = equilib(&["validate", "--check", "gram-inverse", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_valid(&schema("validate.schema.json"), &v);
    let checks = v["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["name"] == "gram-inverse"));
    assert_eq!(v["all_passed"], true);
}

#[test]
fn validate_uses_a_supplied_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_spectrum(dir.path(), "s.json", SPECTRUM);
    let out = equilib(&["validate", "--check", "haar-distance", "--spectrum", s.to_str().unwrap()]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["checks"].as_array().unwrap().iter().any(|c| c["id"] == "5.file"));
    assert_eq!(out.status.code(), Some(if v["all_passed"] == true { 0 } else { 1 }));
}

#[test]
fn validate_default_exit_code_reflects_the_report() {
    // Criterion verdicts are reported by the acceptance target; here only the
    // CLI contract is checked: exit 0 iff every outcome passed, 1 otherwise.
    let out = equilib(&["validate"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_valid(&schema("validate.schema.json"), &v);
    let failing: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert_eq!(v["all_passed"], failing.is_empty());
    assert_eq!(out.status.code(), Some(if failing.is_empty() { 0 } else { 1 }));
    let stderr = String::from_utf8_lossy(&out.stderr);
    for id in &failing {
        assert!(stderr.contains(id), "{id} missing from the summary lines");
    }
}

#[test]
fn spectrum_schema_accepts_the_shipped_format() {
    let v: Value = serde_json::from_str(SPECTRUM).unwrap();
    assert_valid(&schema("spectrum.schema.json"), &v);
    let bad: Value = serde_json::from_str(r#"{"d_S": 2, "d_B": 2, "levels": [{"E": 1.0, "E_num": 1, "E_den": 1}]}"#).unwrap();
    assert!(!schema("spectrum.schema.json").is_valid(&bad));
}
