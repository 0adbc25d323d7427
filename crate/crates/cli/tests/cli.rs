use std::process::{Command, Output};

use serde_json::Value;

fn oscidos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oscidos")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn partition_csv_has_unit_header_and_plain_numbers() {
    let o = oscidos(&["partition", "--phi", "0.3", "--rho-range", "0.5:2:4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "rho [1],Z0 [1],Z_cutoff [1],Z [1],lnZ [1],lnZ_binet [1],F_ex [hbar*freq]"
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        // ln Z two ways, and Z(β; γ) below Z(β)
        assert!((r[4] - r[5]).abs() < 1e-9);
        assert!(r[2] < r[3]);
    }
}

#[test]
fn json_document_schema() {
    let o = oscidos(&["lorentz", "--phi", "0.05", "--lines", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "oscidos/1");
    assert_eq!(v["command"], "lorentz");
    let table = v["tables"].as_object().unwrap().values().next().unwrap();
    assert_eq!(table["rows"].as_array().unwrap().len(), 3);
    assert_eq!(table["columns"][1]["unit"], "freq");
}

#[test]
fn output_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = oscidos(&["density", "--phi", "0.4", "--tmax", "12", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["frobnicate"],
        vec!["partition", "--phi", "2.0"],
        vec!["partition", "--rho-range", "1:2"],
        vec!["partition", "--rho", "1", "--rho-range", "1:2:3"],
        vec!["density", "--format", "xml"],
        vec!["verify", "--only", "17"],
    ] {
        assert_eq!(oscidos(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numeric_failures_exit_3() {
    // φ = 0 puts the kernel poles on the integration path
    assert_eq!(oscidos(&["density", "--phi", "0"]).status.code(), Some(3));
    // one series term cannot meet the truncation tolerance
    assert_eq!(
        oscidos(&["density", "--terms", "1", "--tmax", "20"]).status.code(),
        Some(3)
    );
}

#[test]
fn verify_subset_reports_measured_and_bound() {
    let o = oscidos(&["verify", "--only", "7,10", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    let criteria = v["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 2);
    for c in criteria {
        assert!(c["measured"].is_number() && c["bound"].is_number());
        assert!(c["measured"].as_f64().unwrap() <= c["bound"].as_f64().unwrap());
    }
    assert!(String::from_utf8(o.stderr).unwrap().contains("[pass] 10"));
}

#[test]
fn transform_matches_closed_form() {
    let o = oscidos(&["transform", "--phi", "0.5", "--rho-range", "1:4:3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let table = v["tables"].as_object().unwrap().values().next().unwrap();
    for row in table["rows"].as_array().unwrap() {
        assert!(row[3].as_f64().unwrap() < 1e-3);
    }
}
