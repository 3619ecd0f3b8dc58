//! Black-box tests of the installed binary: exit-status contract, CSV
//! contents, byte determinism and JSON schema conformance.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qvbs"));
    cmd.env_remove("QVBS_OUT_DIR");
    cmd
}

fn run(args: &[&str]) -> (i32, Vec<u8>, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().expect("no signal"),
        out.stdout,
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

fn csv_rows(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_reader(bytes);
    let headers = reader.headers().unwrap().iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect();
    (headers, rows)
}

fn column(headers: &[String], rows: &[Vec<String>], name: &str) -> Vec<String> {
    let idx = headers.iter().position(|h| h == name).unwrap_or_else(|| panic!("column {name}"));
    rows.iter().map(|r| r[idx].clone()).collect()
}

#[test]
fn spectrum_reports_the_undeformed_spin1_point() {
    let (code, stdout, _) = run(&["spectrum", "--spin", "1", "--q", "1"]);
    assert_eq!(code, 0);
    let (headers, rows) = csv_rows(&stdout);
    assert_eq!(rows.len(), 1);
    let eig: Vec<f64> = column(&headers, &rows, "eigenvalues")[0]
        .split(';')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(eig, vec![3.0, -1.0]);
    assert_eq!(column(&headers, &rows, "degeneracies")[0], "1;3");
    assert_eq!(column(&headers, &rows, "pass")[0], "true");
}

#[test]
fn spectrum_rejects_spin_zero() {
    let (code, _, stderr) = run(&["spectrum", "--spin", "0", "--q", "1"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("spin"));
}

#[test]
fn full_grid_is_deterministic_and_clean() {
    let args = ["spectrum", "--spin", "4", "--q-grid", "0.25:4:13:log"];
    let (code, first, _) = run(&args);
    assert_eq!(code, 0);
    let (_, with_jobs, _) = run(&[&args[..], &["--jobs", "3"]].concat());
    assert_eq!(first, with_jobs, "output depends on the worker count");

    let (headers, rows) = csv_rows(&first);
    assert_eq!(rows.len(), 13);
    for name in ["eigen_residual", "intertwiner_residual", "norm_residual"] {
        for cell in column(&headers, &rows, name) {
            assert!(cell.parse::<f64>().unwrap() < 1e-9, "{name} = {cell}");
        }
    }
}

#[test]
fn thermo_scan_matches_the_undeformed_values() {
    let (code, stdout, _) = run(&[
        "correlate", "--spin", "1", "--q", "1", "--pair", "zz", "--r", "2..10", "--mode", "thermo",
    ]);
    assert_eq!(code, 0);
    let (headers, rows) = csv_rows(&stdout);
    assert_eq!(rows.len(), 9);
    for (row, r) in rows.iter().zip(2i32..) {
        let value: f64 = column(&headers, &[row.clone()], "value")[0].parse().unwrap();
        let want = -4.0 * (-1.0f64 / 3.0).powi(r);
        assert!((value - want).abs() <= 1e-12 * want.abs(), "r={r}: {value} vs {want}");
    }
    let zeta: f64 = column(&headers, &rows, "fitted_zeta")[0].parse().unwrap();
    assert!((zeta - 1.0 / 3.0f64.ln()).abs() <= 1e-9);
}

#[test]
fn correlate_rejects_separation_below_two() {
    let (code, _, stderr) = run(&["correlate", "--spin", "1", "--q", "1", "--pair", "pm", "--r", "1"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("separation"));
}

#[test]
fn both_mode_reports_the_finite_size_gap() {
    let (code, stdout, _) = run(&[
        "correlate", "--spin", "1", "--q", "0.5", "--pair", "zz", "--mode", "both", "--L", "12",
        "--r", "2..6",
    ]);
    assert_eq!(code, 0);
    let (headers, rows) = csv_rows(&stdout);
    assert_eq!(rows.len(), 10);
    let modes = column(&headers, &rows, "mode");
    let lens = column(&headers, &rows, "L");
    let gaps = column(&headers, &rows, "thermo_gap");
    let mut finite_gaps = Vec::new();
    for i in 0..rows.len() {
        if modes[i] == "finite" {
            assert_eq!(lens[i], "12");
            finite_gaps.push(gaps[i].parse::<f64>().unwrap());
        } else {
            assert_eq!(modes[i], "thermo");
            assert!(lens[i].is_empty());
            assert!(gaps[i].is_empty());
        }
    }
    // the wrap-around term grows as r approaches L
    assert_eq!(finite_gaps.len(), 5);
    for pair in finite_gaps.windows(2) {
        assert!(pair[0] <= pair[1]);
    }
    assert!(finite_gaps[4] < 1e-2);
}

#[test]
fn verify_suite_passes_on_small_rings() {
    let (code, stdout, _) = run(&["verify", "--spin", "1", "--q", "0.5,1,2", "--L", "2..6"]);
    assert_eq!(code, 0);
    let (headers, rows) = csv_rows(&stdout);
    assert!(rows.len() > 10);
    for cell in column(&headers, &rows, "pass") {
        assert_eq!(cell, "true");
    }
}

#[test]
fn verify_rejects_over_budget_rings() {
    let (code, _, stderr) = run(&["verify", "--spin", "2", "--L", "12"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("budget"));
}

#[test]
fn prop1_grid_reports_per_level_rows() {
    let (code, stdout, _) = run(&["verify", "--prop1", "--spin", "2", "--n-max", "5", "--q", "0.7"]);
    assert_eq!(code, 0);
    let (headers, rows) = csv_rows(&stdout);
    let checks = column(&headers, &rows, "check");
    let details = column(&headers, &rows, "detail");
    assert!(checks.iter().all(|c| c == "lowering"));
    assert_eq!(details, ["J=0", "J=1", "J=2", "J=3", "J=4"]);
}

#[test]
fn sampled_checks_are_seed_deterministic() {
    let args = [
        "verify", "--spin", "1", "--L", "2..4", "--q", "1", "--samples", "3", "--seed", "7",
    ];
    let (code, first, _) = run(&args);
    assert_eq!(code, 0);
    let (_, again, _) = run(&args);
    assert_eq!(first, again);
    let (headers, rows) = csv_rows(&first);
    let sampled = column(&headers, &rows, "check")
        .iter()
        .filter(|c| *c == "sampled-annihilation")
        .count();
    assert_eq!(sampled, 3);
}

#[test]
fn relative_outputs_land_in_the_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["spectrum", "--spin", "1", "--q", "1", "--out", "sub/rows.csv"])
        .env("QVBS_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = dir.path().join("sub/rows.csv");
    let (_, rows) = csv_rows(&std::fs::read(written).unwrap());
    assert_eq!(rows.len(), 1);
}

#[test]
fn json_documents_validate_against_the_shipped_schema() {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/output.schema.json");
    let schema: serde_json::Value =
        serde_json::from_slice(&std::fs::read(schema_path).unwrap()).unwrap();
    let cases: &[&[&str]] = &[
        &["spectrum", "--spin", "1", "--q", "1", "--format", "json"],
        &[
            "correlate", "--spin", "1", "--q", "1", "--pair", "pm", "--mode", "both", "--L", "8",
            "--r", "2..4", "--format", "json",
        ],
        &["correlate", "--spin", "2", "--q", "1", "--mode", "asymptotic", "--r", "4..8", "--format", "json"],
        &[
            "verify", "--spin", "1", "--L", "2..4", "--q", "1", "--samples", "2", "--seed", "3",
            "--format", "json",
        ],
    ];
    for args in cases {
        let (code, stdout, stderr) = run(args);
        assert_eq!(code, 0, "{args:?}: {stderr}");
        let doc: serde_json::Value = serde_json::from_slice(&stdout).expect("valid JSON");
        schema_check::validate(&schema, &doc, "$").unwrap_or_else(|e| panic!("{args:?}: {e}"));
        assert!(!doc["rows"].as_array().unwrap().is_empty());
    }
}

/// Just enough JSON-schema evaluation for the shipped schema: type, enum,
/// required, properties, additionalProperties, items and oneOf.
mod schema_check {
    use serde_json::Value;

    pub fn validate(schema: &Value, value: &Value, path: &str) -> Result<(), String> {
        if let Some(branches) = schema.get("oneOf") {
            let branches = branches.as_array().ok_or("oneOf must hold an array")?;
            let hits = branches.iter().filter(|b| validate(b, value, path).is_ok()).count();
            if hits != 1 {
                return Err(format!("{path}: {hits} oneOf branches match, expected exactly 1"));
            }
            return Ok(());
        }
        if let Some(ty) = schema.get("type") {
            check_type(ty, value, path)?;
        }
        if let Some(allowed) = schema.get("enum") {
            let hit = allowed.as_array().map(|a| a.contains(value)).unwrap_or(false);
            if !hit {
                return Err(format!("{path}: {value} not among {allowed}"));
            }
        }
        if let Some(obj) = value.as_object() {
            if let Some(required) = schema.get("required").and_then(Value::as_array) {
                for name in required {
                    let name = name.as_str().ok_or("required entries must be strings")?;
                    if !obj.contains_key(name) {
                        return Err(format!("{path}: missing required property '{name}'"));
                    }
                }
            }
            let props = schema.get("properties").and_then(Value::as_object);
            if let Some(props) = props {
                for (key, sub) in props {
                    if let Some(v) = obj.get(key) {
                        validate(sub, v, &format!("{path}.{key}"))?;
                    }
                }
            }
            if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
                for key in obj.keys() {
                    if !props.map(|p| p.contains_key(key)).unwrap_or(false) {
                        return Err(format!("{path}: unexpected property '{key}'"));
                    }
                }
            }
        }
        if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
            for (i, v) in arr.iter().enumerate() {
                validate(items, v, &format!("{path}[{i}]"))?;
            }
        }
        Ok(())
    }

    fn check_type(ty: &Value, value: &Value, path: &str) -> Result<(), String> {
        let names: Vec<&str> = match ty {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => return Err(format!("{path}: malformed type keyword")),
        };
        if names.iter().any(|n| matches_type(n, value)) {
            Ok(())
        } else {
            Err(format!("{path}: {value} is not of type {names:?}"))
        }
    }

    fn matches_type(name: &str, value: &Value) -> bool {
        match name {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "boolean" => value.is_boolean(),
            "null" => value.is_null(),
            "number" => value.is_number(),
            "integer" => value.is_i64() || value.is_u64(),
            _ => false,
        }
    }
}
