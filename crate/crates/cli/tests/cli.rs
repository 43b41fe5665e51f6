//! End-to-end runs of the binary, checked against the shipped schemas.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (bool, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_reciprocity"))
        .arg("--json")
        .args(args)
        .env_remove("RECIPROCITY_DEFAULT_CAPS")
        .output()
        .expect("binary runs");
    let v: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    (out.status.success(), v)
}

fn schema(name: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(format!("{name}.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, v: &Value) {
    let s = schema(schema_name);
    let validator = jsonschema::validator_for(&s).unwrap();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}\n{v:#}");
}

fn result_schema(command: &str) -> &'static str {
    match command {
        "fg build" => "fg_build",
        "fg check" => "fg_check",
        "fg height" => "fg_height",
        "herr check-complex" => "herr_check_complex",
        "herr homology" => "herr_homology",
        "herr cup" => "herr_cup",
        "herr kummer" => "herr_kummer",
        "gbelt check" => "gbelt_check",
        _ => "symbol_result",
    }
}

/// Runs a command and validates the envelope and its result.
fn checked(args: &[&str]) -> (bool, Value) {
    let (ok, v) = run(args);
    assert_valid("envelope", &v);
    assert_valid(result_schema(v["command"].as_str().unwrap()), &v["result"]);
    assert_eq!(ok, v["pass"].as_bool().unwrap());
    (ok, v)
}

#[test]
fn bv_of_y_with_itself_is_zero() {
    let (ok, v) = checked(&["symbol", "bv", "--p", "3", "--n", "1", "--s", "1+Y", "--F", "Y", "--G", "Y"]);
    assert!(ok);
    assert_eq!(v["result"]["coords"], serde_json::json!([0]));
    assert_eq!(v["result"]["cap_stable"], Value::Bool(true));
}

#[test]
fn height_of_phi_squared() {
    let (ok, v) = checked(&["fg", "height", "--p", "3", "--op", "phi^2"]);
    assert!(ok);
    assert_eq!(v["result"]["height"], 2);
}

#[test]
fn complex_check_passes() {
    let (ok, v) = checked(&["herr", "check-complex", "--p", "3", "--N", "2", "--caps", "4,4", "--chi", "4"]);
    assert!(ok);
    assert_eq!(v["result"]["samples"], 100);
}

#[test]
fn homology_orders() {
    let (ok, v) = checked(&["herr", "homology", "--p", "3", "--N", "1", "--caps", "2,2", "--chi", "4"]);
    assert!(ok);
    assert_eq!(v["result"]["log_p_orders"], serde_json::json!([1, 3, 3, 1]));
}

#[test]
fn remaining_commands_match_their_schemas() {
    checked(&["fg", "build", "--p", "3", "--op", "phi", "--cap", "4"]);
    checked(&["fg", "check", "--p", "3", "--op", "phi", "--cap", "6"]);
    checked(&["herr", "cup", "--p", "3", "--N", "2", "--caps", "3,3", "--samples", "3"]);
    checked(&["herr", "kummer", "--p", "3", "--N", "2", "--F", "1+Y"]);
    checked(&["symbol", "coleman", "--p", "3", "--n", "1", "--F", "1+X", "--G", "1+X+X^2"]);
    let (_, v) = checked(&["symbol", "formal", "--p", "3", "--n", "1", "--alpha", "1+Y", "--beta", "Y^2"]);
    let a = v["result"]["coords"].clone();
    let (_, v) = checked(&["symbol", "formal-cohomological", "--p", "3", "--n", "1", "--alpha", "1+Y", "--beta", "Y^2"]);
    assert_eq!(v["result"]["coords"], a);
    assert!(v["result"]["residual"]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn failed_check_exits_nonzero() {
    let (ok, v) = checked(&["gbelt", "check", "--a", "inf", "--b", "0", "--series", "Y^-1 + 3*Y"]);
    assert!(!ok);
    assert_eq!(v["result"]["inner_ok"], Value::Bool(false));
}

#[test]
fn errors_are_reported_as_json() {
    let (ok, v) = run(&["symbol", "bv", "--F", "Y/3", "--G", "Y"]);
    assert!(!ok);
    assert_valid("error", &v);
    let (ok, v) = run(&["symbol", "bv", "--F", "1 + * Y", "--G", "Y"]);
    assert!(!ok);
    assert_valid("error", &v);
    assert_eq!(v["error"]["kind"], "ParseError");
}

#[test]
fn default_caps_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_reciprocity"))
        .args(["--json", "symbol", "bv", "--F", "1+Y", "--G", "Y"])
        .env("RECIPROCITY_DEFAULT_CAPS", "30,-30")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["caps"]["y_cap"], 30);
}

#[test]
fn table_output_without_json() {
    let out = Command::new(env!("CARGO_BIN_EXE_reciprocity"))
        .args(["fg", "height", "--op", "phi"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("height"));
}
