use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qpdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpdyn")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn example(dir: &TempDir, name: &str) -> PathBuf {
    let path = dir.path().join(format!("{name}.json"));
    let o = qpdyn(&["example", name, "-o", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_e1_applies() {
    let dir = TempDir::new().unwrap();
    let f = example(&dir, "E1");
    let o = qpdyn(&["analyze", s(&f)]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    for line in ["reduced.nu = 2", "reduced.k = 1", "reduced.l = 0", "verdict.theorem_applies = true"] {
        assert!(out.lines().any(|l| l.starts_with(line)), "missing {line:?}");
    }
    assert!(!out.contains("= false"));
}

#[test]
fn non_attracting_exits_2_and_names_the_item() {
    let dir = TempDir::new().unwrap();
    let f = example(&dir, "E1");
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&f).unwrap()).unwrap();
    // a_2 = -λ_2 turns A into -1/2, so the second ratio has negative real part.
    for term in doc["components"]["w2"].as_array_mut().unwrap() {
        if term["w_exp"] == serde_json::json!([1, 2]) {
            for part in ["re", "im"] {
                term[part] = Value::from(term[part].as_f64().unwrap() * -2.0);
            }
        }
    }
    let g = dir.path().join("bad.json");
    fs::write(&g, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let o = qpdyn(&["analyze", s(&g)]);
    assert_eq!(code(&o), 2);
    let out = stdout(&o);
    assert!(out.contains("checklist.attracting = false"));
    assert!(out.contains("verdict.failing = attracting"));
}

#[test]
fn missing_field_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let f = example(&dir, "E1");
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&f).unwrap()).unwrap();
    doc.as_object_mut().unwrap().remove("lambda_angles");
    fs::write(&f, doc.to_string()).unwrap();
    let o = qpdyn(&["analyze", s(&f)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda_angles"));

    let o = qpdyn(&["analyze", s(&dir.path().join("absent.json"))]);
    assert_eq!(code(&o), 1);
    let o = qpdyn(&["frobnicate"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn example_roundtrip_is_stable() {
    let dir = TempDir::new().unwrap();
    for name in ["E1", "E2", "E3"] {
        let f = example(&dir, name);
        let o = qpdyn(&["example", name]);
        assert_eq!(stdout(&o), fs::read_to_string(&f).unwrap());
        assert_eq!(code(&qpdyn(&["analyze", s(&f)])), 0, "{name}");
    }
}

#[test]
fn verify_is_deterministic_and_passes() {
    let dir = TempDir::new().unwrap();
    let f = example(&dir, "E3");
    let a = qpdyn(&["verify", s(&f), "--seed", "7"]);
    let b = qpdyn(&["verify", s(&f), "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert!(out.contains("petal[1,1].invariance = 1000/1000"));
    assert!(out.contains("petal[2,1].invariance = 1000/1000"));
    assert!(out.contains("verdict.verified = true"));
}

#[test]
fn short_log_orbit_fails_verification() {
    let dir = TempDir::new().unwrap();
    let f = example(&dir, "E2");
    let o = qpdyn(&["verify", s(&f), "--max-iter", "1000"]);
    assert_eq!(code(&o), 2);
    let out = stdout(&o);
    assert!(out.contains("trace too short"));
    assert!(out.contains("verdict.verified = false"));
}

#[test]
fn orbit_csv_has_header_and_footer() {
    let dir = TempDir::new().unwrap();
    let f = example(&dir, "E1");
    let csv = dir.path().join("orbit.csv");
    let o = qpdyn(&["orbit", s(&f), "--max-iter", "500", "--stride", "5", "--csv", s(&csv)]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("m,re_z,im_z,abs_z,abs_u"));
    assert_eq!(*lines.last().unwrap(), "# status=converging steps=500 non_finite=false");
    // 0..=100 dense, then 105, 110, ..., 500
    assert_eq!(lines.len(), 1 + 101 + 80 + 1);

    let o = qpdyn(&["orbit", s(&f), "--start", "0.01,0.1:0.05,0.1", "--max-iter", "10"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("0,1.00000000000e-2,0.00000000000e0"));
    let o = qpdyn(&["orbit", s(&f), "--start", "0.01,0.1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn slice_labels_both_petals_of_e3() {
    let dir = TempDir::new().unwrap();
    let f = example(&dir, "E3");
    let o = qpdyn(&["slice", s(&f), "--grid", "21x21", "--window", "-0.3,0.3,-0.3,0.3"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 441);
    let petal_of = |r: &Vec<&str>| (r[5].to_string(), r[7].to_string());
    let members: Vec<(String, String)> = rows.iter().map(petal_of).filter(|(_, m)| m == "1").collect();
    assert!(members.iter().any(|(t, _)| t == "1"));
    assert!(members.iter().any(|(t, _)| t == "2"));
    for r in &rows {
        if r[7] == "0" {
            assert_eq!((r[5], r[6]), ("0", "0"));
        }
    }

    // A window that keeps |u| above epsilon contains no member.
    let o = qpdyn(&["slice", s(&f), "--grid", "5x5", "--window", "2,3,2,3"]);
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",0")));
}
