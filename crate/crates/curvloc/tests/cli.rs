//! Contract tests for the command-line binary: JSON shape, exit codes,
//! artifact writing and byte determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_curvloc"))
}

fn write_germ(dir: &std::path::Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("curvloc-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout must be JSON")
}

#[test]
fn classify_report() {
    let dir = tempdir("classify");
    let g = write_germ(&dir, "crosscap.germ", "(x, y, x*z, y*z, z^2)\n");
    let out = bin().arg("classify").arg(&g).output().unwrap();
    let v = json_of(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["orbit"], "XZ_YZ_Z2");
    assert_eq!(v["d"], "1");
    assert_eq!(v["rank_alpha"], 3);
    assert_eq!(v["non_degenerate"], true);
    assert_eq!(v["topological_type"], "SubstantialSurface");
    assert_eq!(v["point_type"], "M3");
}

#[test]
fn classify_is_byte_deterministic() {
    let dir = tempdir("determinism");
    let g = write_germ(&dir, "g.germ", "(x, y, x^2 + y*z, y^2 + x*z, z^2 + x*y)");
    let a = bin().arg("classify").arg(&g).output().unwrap();
    let b = bin().arg("classify").arg(&g).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn parse_error_exits_2() {
    let dir = tempdir("parse");
    let g = write_germ(&dir, "bad.germ", "(x, y, z^^2, 0, 0)");
    let out = bin().arg("classify").arg(&g).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn wrong_corank_exits_3() {
    let dir = tempdir("corank");
    let g = write_germ(&dir, "regular.germ", "(x, y, z, 0, 0)");
    let out = bin().arg("classify").arg(&g).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unsupported_orbit_exits_5() {
    let dir = tempdir("orbit");
    let a = write_germ(&dir, "a.germ", "(x, y, x*z, y*z, z^2)");
    let b = write_germ(&dir, "b.germ", "(x, y, z^2, x*z, 0)");
    let out = bin().arg("iso").arg(&a).arg(&b).output().unwrap();
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn locus_writes_obj_and_csv() {
    let dir = tempdir("locus");
    let g = write_germ(&dir, "g.germ", "(x, y, x*z, y*z, z^2)");
    let obj = dir.join("locus.obj");
    let out = bin()
        .args(["locus"])
        .arg(&g)
        .args(["--grid", "8x8", "--cmax", "2", "--format", "obj", "--out"])
        .arg(&obj)
        .output()
        .unwrap();
    let v = json_of(&out);
    assert_eq!(v["affine_hull_dimension"], 3);
    let text = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 64);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 49);

    let csv = dir.join("locus.csv");
    let out = bin()
        .args(["locus"])
        .arg(&g)
        .args(["--grid", "4x3", "--format", "csv", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    json_of(&out);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("theta,param2,n1,n2,n3"));
}

#[test]
fn locus_unwritable_output_exits_4() {
    let dir = tempdir("unwritable");
    let g = write_germ(&dir, "g.germ", "(x, y, x*z, y*z, z^2)");
    let out = bin()
        .args(["locus"])
        .arg(&g)
        .args(["--out", "/nonexistent-dir/locus.obj"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn locus_vanishing_forms_with_degree() {
    let dir = tempdir("degree");
    let g = write_germ(&dir, "g.germ", "(x, y, x*z, y*z, z^2)");
    let out = bin()
        .args(["locus"])
        .arg(&g)
        .args(["--degree", "2"])
        .output()
        .unwrap();
    let v = json_of(&out);
    assert_eq!(v["vanishing_forms"]["degree"], 2);
    assert_eq!(v["vanishing_forms"]["dimension"], 1);
}

#[test]
fn lift_reports_residual() {
    let dir = tempdir("lift");
    let g = write_germ(&dir, "g.germ", "(x, y, x*z, y*z, z^2)");
    let out = bin().arg("lift").arg(&g).output().unwrap();
    let v = json_of(&out);
    assert_eq!(v["lift"], "(x, y, z, x*z, y*z, z^2)");
    assert!(v["blowup_residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn net_discriminant_and_label() {
    let out = bin()
        .args(["net", "discriminant", "(x^2, y^2, z^2 + 2*x*y)"])
        .output()
        .unwrap();
    let v = json_of(&out);
    assert_eq!(v["discriminant"], "l*m*n - n^3");

    let out = bin()
        .args(["net", "label", "--c", "-1", "--g", "0"])
        .output()
        .unwrap();
    let v = json_of(&out);
    assert_eq!(v["label"], "A_b");

    let out = bin().args(["net", "example44"]).output().unwrap();
    let v = json_of(&out);
    assert_eq!(v["step1_ok"], true);
    assert_eq!(v["step2_ok"], true);
    assert_eq!(v["step3_ok"], true);
}

#[test]
fn iso_verdicts() {
    let dir = tempdir("iso");
    let a = write_germ(&dir, "a.germ", "(x, y, x*z, y*z, z^2)");
    let b = write_germ(&dir, "b.germ", "(x, y, x*z, -y*z, z^2)");
    let c = write_germ(&dir, "c.germ", "(x, y, x*z, y*z, 2*z^2)");
    let out = bin().arg("iso").arg(&a).arg(&b).output().unwrap();
    let v = json_of(&out);
    assert_eq!(v["equivalent"], true);
    assert!(v["witness"]["solution_index"].is_number());
    let out = bin().arg("iso").arg(&a).arg(&c).output().unwrap();
    let v = json_of(&out);
    assert_eq!(v["equivalent"], false);
    assert_eq!(v["certificate"], "c4");
}
