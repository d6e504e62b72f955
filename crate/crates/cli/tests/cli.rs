use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("pmm-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn pmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmm")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_writes_outputs() {
    let out = scratch("build");
    let o = pmm(&["build", "--input", path(&fixture("example_iii.json")), "--output", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let bars: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("barcode.json")).unwrap()).unwrap();
    assert_eq!(bars.as_array().unwrap().len(), 2);
    let text = std::fs::read_to_string(out.join("presentation.txt")).unwrap();
    assert!(text.contains("@2 ="), "{text}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn saved_model_checks_and_tampering_fails() {
    let out = scratch("check");
    let o = pmm(&["build", "--input", path(&fixture("example_iii.json")), "--emit", "model", "--output", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let model = out.join("model.json");
    assert_eq!(pmm(&["check", "--input", path(&model)]).status.code(), Some(0));

    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    let gens = doc["generators"].as_array_mut().unwrap();
    let g = gens.iter_mut().find(|g| g["degree"] == 4).unwrap();
    g["endpoint"] = serde_json::Value::String("2*x2_1^2".into());
    let bad = out.join("tampered.json");
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = pmm(&["check", "--input", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("failing invariants"));
}

#[test]
fn decompose_module() {
    let o = pmm(&["decompose", "--input", path(&fixture("module_121.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let bars: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(bars.as_array().unwrap().len(), 2);
    assert_eq!(bars[1]["death"], serde_json::Value::Null);
}

#[test]
fn rejects_non_simply_connected_input() {
    let o = pmm(&["build", "--input", path(&fixture("not_simply_connected.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not simply-connected"));
}

#[test]
fn malformed_json_is_a_schema_error() {
    let dir = scratch("bad");
    let f = dir.join("bad.json");
    std::fs::write(&f, "{ \"grid\": [").unwrap();
    assert_eq!(pmm(&["build", "--input", path(&f)]).status.code(), Some(2));
}

#[test]
fn text_format_barcode() {
    let o = pmm(&["build", "--input", path(&fixture("three_sphere.json")), "--emit", "barcode", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout), "degree 3 [0, inf)\n");
}
