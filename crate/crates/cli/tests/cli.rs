//! Drives the built binary: exit codes, document shapes against the shipped
//! schema, and byte-for-byte deterministic output.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn graphbell(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_graphbell"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("stdout is utf-8"),
        String::from_utf8(out.stderr).expect("stderr is utf-8"),
        out.status.code().expect("no signal"),
    )
}

fn schema() -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/output-schema.json");
    serde_json::from_str(&fs::read_to_string(path).expect("schema file readable"))
        .expect("schema parses")
}

/// Small structural validator covering the subset of JSON Schema the shipped
/// document descriptions use: $ref into $defs, type, required, properties
/// with additionalProperties: false, items and enum.
fn validate(value: &Value, def: &Value, defs: &Value, at: &str) {
    if let Some(reference) = def.get("$ref").and_then(Value::as_str) {
        let name = reference.strip_prefix("#/$defs/").expect("local ref");
        return validate(value, &defs[name], defs, at);
    }
    if let Some(options) = def.get("enum").and_then(Value::as_array) {
        assert!(options.contains(value), "{at}: {value} not in {options:?}");
    }
    match def.get("type").and_then(Value::as_str) {
        Some("object") => {
            let map = value.as_object().unwrap_or_else(|| panic!("{at}: expected object"));
            if let Some(required) = def.get("required").and_then(Value::as_array) {
                for key in required {
                    let key = key.as_str().unwrap();
                    assert!(map.contains_key(key), "{at}: missing required key {key}");
                }
            }
            if let Some(properties) = def.get("properties").and_then(Value::as_object) {
                let closed = def.get("additionalProperties") == Some(&Value::Bool(false));
                for (key, entry) in map {
                    match properties.get(key) {
                        Some(sub) => validate(entry, sub, defs, &format!("{at}.{key}")),
                        None => assert!(!closed, "{at}: unexpected key {key}"),
                    }
                }
            } else if let Some(extra) = def.get("additionalProperties") {
                for (key, entry) in map {
                    validate(entry, extra, defs, &format!("{at}.{key}"));
                }
            }
        }
        Some("array") => {
            let items = value.as_array().unwrap_or_else(|| panic!("{at}: expected array"));
            if let Some(sub) = def.get("items") {
                for (idx, entry) in items.iter().enumerate() {
                    validate(entry, sub, defs, &format!("{at}[{idx}]"));
                }
            }
        }
        Some("integer") => {
            assert!(value.as_i64().is_some(), "{at}: expected integer, got {value}");
        }
        Some("number") => {
            assert!(value.as_f64().is_some(), "{at}: expected number, got {value}");
        }
        Some("string") => {
            assert!(value.is_string(), "{at}: expected string, got {value}");
        }
        Some("boolean") => {
            assert!(value.is_boolean(), "{at}: expected boolean, got {value}");
        }
        _ => {}
    }
}

fn check_document(text: &str, def_name: &str) -> Value {
    let value: Value = serde_json::from_str(text).expect("document parses as JSON");
    let schema = schema();
    validate(&value, &schema["$defs"][def_name], &schema["$defs"], def_name);
    value
}

#[test]
fn worked_example_produces_the_documented_numbers() {
    let (stdout, _, code) = graphbell(&[
        "inequality", "--family", "LC", "--n", "3", "--theorem1", "-i", "2", "-I", "1,3",
    ]);
    assert_eq!(code, 0);
    let doc = check_document(&stdout, "inequality_document");
    assert_eq!(doc["inequality"]["classical_bound"], 2.0);
    assert_eq!(doc["inequality"]["quantum_value"], 4.0);
    assert_eq!(doc["inequality"]["violation"], 2.0);
    assert_eq!(doc["bounds"]["classical_max"], 2.0);
    assert_eq!(doc["inequality"]["terms"].as_array().unwrap().len(), 4);
    assert!(doc.get("dense_quantum_value").is_none());
}

#[test]
fn dense_verification_adds_the_cross_checked_value() {
    let (stdout, _, code) = graphbell(&[
        "inequality", "--family", "LC", "--n", "3", "--theorem1", "-i", "2", "-I", "1,3",
        "--lemma1", "--dense-verify",
    ]);
    assert_eq!(code, 0);
    let doc = check_document(&stdout, "inequality_document");
    assert_eq!(doc["bounds"]["lemma1_used"], true);
    let dense = doc["dense_quantum_value"].as_f64().unwrap();
    assert!((dense - 4.0).abs() < 1e-8);
}

#[test]
fn weighted_star_reports_its_two_setting_ratio() {
    let (stdout, _, code) = graphbell(&[
        "inequality", "--family", "ST", "--n", "4", "--ardehali", "-i", "1", "-I", "2,3,4",
    ]);
    assert_eq!(code, 0);
    let doc = check_document(&stdout, "inequality_document");
    let violation = doc["bounds"]["violation"].as_f64().unwrap();
    assert!((violation - 2.0 * 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn precondition_failures_exit_with_2() {
    // Adjacent vertices offered as an independent set.
    let (_, stderr, code) = graphbell(&[
        "inequality", "--family", "FC", "--n", "3", "--theorem1", "-i", "1", "-I", "2,3",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("not independent"), "stderr: {stderr}");

    let (_, _, code) = graphbell(&["table1", "--max-n", "2"]);
    assert_eq!(code, 2);

    let (_, _, code) = graphbell(&["inequality", "--family", "LC", "--n", "3", "--format", "csv"]);
    assert_eq!(code, 2);

    let (_, _, code) = graphbell(&["inequality"]);
    assert_eq!(code, 2);
}

#[test]
fn resource_caps_exit_with_3() {
    let (_, stderr, code) = graphbell(&["facet", "--pattern", "mermin", "-m", "6"]);
    assert_eq!(code, 3, "stderr: {stderr}");

    let leaves: Vec<String> = (2..=25).map(|v| v.to_string()).collect();
    let (_, _, code) = graphbell(&[
        "inequality", "--family", "ST", "--n", "25", "--theorem1", "-i", "1", "-I",
        &leaves.join(","),
    ]);
    assert_eq!(code, 3);
}

#[test]
fn table_is_stable_and_matches_the_fixture() {
    let args = ["table1", "--max-n", "5"];
    let (first, _, code) = graphbell(&args);
    assert_eq!(code, 0);
    let (second, _, _) = graphbell(&args);
    assert_eq!(first, second, "two runs must emit identical bytes");

    let expected = "family,n,violation\n\
                    LC,3,2\nLC,4,2\nLC,5,2\n\
                    RC,3,2\nRC,4,2\nRC,5,2\n\
                    ST,3,2\nST,4,2\nST,5,4\n";
    assert_eq!(first, expected);

    let (json_text, _, code) = graphbell(&["table1", "--max-n", "5", "--format", "json"]);
    assert_eq!(code, 0);
    let rows = check_document(&json_text, "table");
    assert_eq!(rows.as_array().unwrap().len(), 9);
}

#[test]
fn graph_files_and_families_build_the_same_document() {
    let path = std::env::temp_dir().join(format!("graphbell-path3-{}.graph", std::process::id()));
    fs::write(&path, "3\n1 2\n2 3\n").unwrap();
    let file_arg = path.to_str().unwrap();

    let (from_file, _, code) = graphbell(&[
        "inequality", "--graph", file_arg, "--theorem1", "-i", "2", "-I", "1,3",
    ]);
    assert_eq!(code, 0);
    let (from_family, _, _) = graphbell(&[
        "inequality", "--family", "LC", "--n", "3", "--theorem1", "-i", "2", "-I", "1,3",
    ]);
    assert_eq!(from_file, from_family);
    fs::remove_file(&path).ok();
}

#[test]
fn cluster_suite_passes_through_the_binary() {
    let (stdout, _, code) = graphbell(&["verify-lc4"]);
    assert_eq!(code, 0);
    let doc = check_document(&stdout, "verify_lc4_document");
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["pairwise"]["pairs"], 28);
}

#[test]
fn facet_documents_cover_both_verdicts() {
    let (stdout, _, code) = graphbell(&["facet", "--pattern", "chsh"]);
    assert_eq!(code, 0);
    let doc = check_document(&stdout, "facet_document");
    assert_eq!(doc["is_facet"], true);

    let (stdout, _, code) = graphbell(&["facet", "--pattern", "single"]);
    assert_eq!(code, 0);
    let doc = check_document(&stdout, "facet_document");
    assert_eq!(doc["is_facet"], false);

    let (stdout, _, code) = graphbell(&["facet", "--family", "FC", "--n", "3", "--triangle", "1,2,3"]);
    assert_eq!(code, 0);
    let doc = check_document(&stdout, "facet_document");
    assert_eq!(doc["is_facet"], true);
    assert_eq!(doc["affine_rank"], 7);
}

#[test]
fn composite_command_reports_multiplied_bounds() {
    let (stdout, _, code) = graphbell(&[
        "inequality", "--family", "LC", "--n", "8", "--composite",
    ]);
    assert_eq!(code, 0);
    let doc = check_document(&stdout, "inequality_document");
    assert_eq!(doc["inequality"]["classical_bound"], 4.0);
    assert_eq!(doc["inequality"]["quantum_value"], 16.0);
    assert_eq!(doc["bounds"]["violation"], 4.0);
}
