use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(spec: &str, dir: &Path) -> (Output, Option<Value>) {
    let spec_path = dir.join("spec.toml");
    let out_path = dir.join("report.json");
    let _ = std::fs::remove_file(&out_path);
    std::fs::write(&spec_path, spec).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_parahermitian"))
        .arg(&spec_path)
        .arg(&out_path)
        .output()
        .unwrap();
    let report = std::fs::read_to_string(&out_path).ok().map(|t| serde_json::from_str(&t).unwrap());
    (out, report)
}

fn suite<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["suites"].as_array().unwrap().iter().find(|s| s["name"] == name).unwrap()
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name)
}

#[test]
fn flat_pipeline_flags_jacobi_defect_as_expected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"
seed = 5
suites = ["validate", "courant_plus", "jacobi_defect_witness"]
[model]
kind = "flat"
n = 2
[sample]
count = 6
fields = 3
"#;
    let (out, report) = run(spec, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report.unwrap();
    assert_eq!(r["report_version"], 1);
    assert_eq!(r["passed"], true);
    assert_eq!(suite(&r, "validate")["status"], "pass");
    assert_eq!(suite(&r, "courant_plus")["status"], "pass");
    let j = suite(&r, "jacobi_defect_witness");
    assert_eq!(j["status"], "expected_fail");
    let w = &j["witnesses"][0];
    assert_eq!(w["point"].as_array().unwrap().len(), 4);
    assert_eq!(w["inputs"].as_array().unwrap().len(), 3);
    assert!(w["residual"].as_f64().unwrap() > 1e-4);
}

#[test]
fn syntax_error_in_expression_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"
suites = ["validate"]
[model]
kind = "explicit"
coords = ["x1", "x2"]
eta = ["0", "1", "1", "x1 +* 2"]
k = ["1", "0", "0", "-1"]
"#;
    let (out, report) = run(spec, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(report.is_none());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("model.eta[3]") && err.contains("syntax error at byte"), "{err}");
}

#[test]
fn malformed_toml_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let (out, _) = run("seed = [\n[model]\nkind = \"flat\"\n", dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line "));
}

#[test]
fn b_field_suites_need_a_b_field() {
    let dir = tempfile::tempdir().unwrap();
    let (out, _) = run("suites = [\"fluxes\"]\n[model]\nkind = \"flat\"\n", dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("suites[0]"));
}

#[test]
fn sphere_classification() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"
suites = ["classify"]
[model]
kind = "tangent_bundle"
preset = "sphere"
[sample]
count = 5
"#;
    let (out, report) = run(spec, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report.unwrap();
    let d = &suite(&r, "classify")["details"];
    assert_eq!(d["n_para_kahler"], true);
    assert_eq!(d["p_integrable"], false);
}

#[test]
fn failing_suite_exits_1_with_witness_row() {
    // T₊ of the sphere model is not integrable, so ⟦,⟧₊ is not a Courant bracket.
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"
suites = ["courant_plus"]
[model]
kind = "tangent_bundle"
preset = "sphere"
[sample]
count = 4
fields = 2
"#;
    let (out, report) = run(spec, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let r = report.unwrap();
    let s = suite(&r, "courant_plus");
    assert_eq!(s["status"], "fail");
    assert!(!s["witnesses"].as_array().unwrap().is_empty());
    let table = String::from_utf8_lossy(&out.stdout);
    let row = table.lines().find(|l| l.starts_with("courant_plus")).unwrap();
    assert!(row.contains("FAIL") && row.contains('('), "{row}");
}

#[test]
fn empty_suite_list_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (out, report) = run("[model]\nkind = \"flat\"\n", dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(report.unwrap()["suites"].as_array().unwrap().is_empty());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
}

#[test]
fn reports_are_identical_apart_from_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let spec = std::fs::read_to_string(shipped("tangent_bundle_flat.toml")).unwrap();
    let (_, a) = run(&spec, dir.path());
    let (_, b) = run(&spec, dir.path());
    let (mut a, mut b) = (a.unwrap(), b.unwrap());
    assert_eq!(a["determinism_hash"], b["determinism_hash"]);
    a.as_object_mut().unwrap().remove("wall_time_seconds");
    b.as_object_mut().unwrap().remove("wall_time_seconds");
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn shipped_specs_pass() {
    for name in ["flat.toml", "tangent_bundle.toml", "tangent_bundle_flat.toml", "explicit.toml"] {
        let dir = tempfile::tempdir().unwrap();
        let spec = std::fs::read_to_string(shipped(name)).unwrap();
        let (out, report) = run(&spec, dir.path());
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(report.unwrap()["passed"], true, "{name}");
    }
}
