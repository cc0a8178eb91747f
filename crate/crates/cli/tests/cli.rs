//! End-to-end tests of the `surf` binary: exit codes, file outputs and
//! determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn surf(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surf"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("surf-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn family_rotation_writes_field_and_passes() {
    let dir = tmpdir("rotation");
    let out = surf(
        &[
            "family",
            "rotation",
            "--profile",
            "0.2*sin",
            "--c",
            "0.3",
            "--grid",
            "65x65:0,0,0.015625",
            "--out",
            "rot.json",
        ],
        &dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("gc1 R1"), "residual line expected: {stdout}");
    let first = std::fs::read(dir.join("rot.json")).unwrap();
    // Byte-identical on a second run.
    surf(
        &[
            "family",
            "rotation",
            "--profile",
            "0.2*sin",
            "--c",
            "0.3",
            "--grid",
            "65x65:0,0,0.015625",
            "--out",
            "rot2.json",
        ],
        &dir,
    );
    let second = std::fs::read(dir.join("rot2.json")).unwrap();
    assert_eq!(first, second, "family output must be deterministic");
}

#[test]
fn family_roman_meets_tolerance() {
    let dir = tmpdir("roman");
    let out = surf(
        &[
            "family",
            "roman",
            "--a",
            "1,0,0",
            "--grid",
            "65x65:1,1,0.015625",
            "--out",
            "roman.json",
        ],
        &dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_family_exits_2() {
    let dir = tmpdir("nosuch");
    let out = surf(&["family", "nosuch"], &dir);
    assert_eq!(code(&out), 2);
}

#[test]
fn check_constants_reports_classes() {
    let dir = tmpdir("check");
    surf(
        &[
            "family", "constant", "--beta0", "1", "--gamma0", "2", "--v0", "3", "--w0", "4",
            "--grid", "9x9:0,0,0.25", "--out", "c.json",
        ],
        &dir,
    );
    let out = surf(
        &["check", "--in", "c.json", "--out", "report.json"],
        &dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    let classes = &report["classes"];
    for name in [
        "isothermally-asymptotic",
        "r0-x",
        "r",
        "jonas",
        "projectively-minimal",
    ] {
        assert_eq!(classes[name]["member"], serde_json::Value::Bool(true), "{name}");
    }
    assert_eq!(
        classes["linear-complex-x"]["member"],
        serde_json::Value::Bool(false)
    );
}

#[test]
fn check_malformed_exits_2() {
    let dir = tmpdir("malformed");
    std::fs::write(dir.join("bad.json"), "{\"grid\": 7}").unwrap();
    let out = surf(&["check", "--in", "bad.json"], &dir);
    assert_eq!(code(&out), 2);
}

#[test]
fn frame_demoulin_invariants_and_mesh() {
    let dir = tmpdir("frame");
    surf(
        &[
            "family", "constant", "--beta0", "-1", "--gamma0", "-1", "--v0", "0", "--w0", "0",
            "--grid", "33x33:0,0,0.015625", "--out", "dem.json",
        ],
        &dir,
    );
    let out = surf(
        &[
            "frame",
            "--in",
            "dem.json",
            "--system",
            "wilczynski4",
            "--mesh",
            "dem.obj",
            "--invariants",
            "inv.json",
        ],
        &dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let inv: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("inv.json")).unwrap()).unwrap();
    let drift = inv["lambda=none"]["det_drift"].as_f64().unwrap();
    assert!(drift <= 1e-10, "det drift {drift}");
    let obj = std::fs::read_to_string(dir.join("dem.obj")).unwrap();
    assert!(obj.lines().filter(|l| l.starts_with("v ")).count() == 33 * 33);
    assert!(obj.lines().any(|l| l.starts_with("f ")));
}

#[test]
fn frame_spectral_sweep_records_lambdas() {
    let dir = tmpdir("sweep");
    surf(
        &[
            "family", "constant", "--beta0", "0.7", "--gamma0", "0.7", "--v0", "1", "--w0", "1",
            "--grid", "17x17:0,0,0.05", "--out", "iso.json",
        ],
        &dir,
    );
    let out = surf(
        &[
            "frame",
            "--in",
            "iso.json",
            "--system",
            "plucker6-mvn",
            "--lambda",
            "1",
            "--lambda",
            "-2.5",
            "--invariants",
            "inv.json",
        ],
        &dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let inv: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("inv.json")).unwrap()).unwrap();
    assert!(inv["lambda=1"]["zero_curvature_sup"].is_number());
    assert!(inv["lambda=-2.5"]["zero_curvature_sup"].is_number());
}

#[test]
fn frame_routes_quadric_data() {
    let dir = tmpdir("quadricroute");
    surf(
        &[
            "family", "constant", "--beta0", "0", "--gamma0", "0", "--v0", "1", "--w0", "2",
            "--grid", "17x17:0,0,0.05", "--out", "q.json",
        ],
        &dir,
    );
    let out = surf(
        &["frame", "--in", "q.json", "--system", "wilczynski4", "--mesh", "q.obj"],
        &dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("separable"), "{stdout}");
    assert!(dir.join("q.obj").exists());
}

#[test]
fn backlund_isothermal_output_is_isothermal() {
    let dir = tmpdir("backlund");
    surf(
        &[
            "family", "constant", "--beta0", "1", "--gamma0", "1", "--v0", "1.5", "--w0", "1.5",
            "--grid", "33x33:0,0,0.03125", "--out", "rotc.json",
        ],
        &dir,
    );
    let out = surf(
        &[
            "backlund",
            "--in",
            "rotc.json",
            "--kind",
            "isothermal",
            "--lambda",
            "0.5",
            "--out",
            "t.json",
            "--report",
            "rep.json",
        ],
        &dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let t: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("t.json")).unwrap()).unwrap();
    assert_eq!(t["beta"], t["gamma"], "isothermal output");
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("rep.json")).unwrap()).unwrap();
    assert_eq!(rep["class_residual"].as_f64().unwrap(), 0.0);
}

#[test]
fn backlund_wrong_class_exits_3() {
    let dir = tmpdir("backlund3");
    // The minimal-surface field is Jonas but not R.
    surf(
        &["family", "minimal", "--grid", "33x33:0.5,0.5,0.03125", "--out", "min.json"],
        &dir,
    );
    let out = surf(
        &["backlund", "--in", "min.json", "--kind", "r", "--lambda", "0.5", "--out", "t.json"],
        &dir,
    );
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn backlund_rectify_reports_ruled_image() {
    let dir = tmpdir("rectify");
    surf(
        &[
            "family", "linear-complex-pair", "--grid", "65x65:1,1,0.015625", "--out", "lc.json",
        ],
        &dir,
    );
    let out = surf(
        &[
            "backlund", "--in", "lc.json", "--kind", "rectify", "--out", "t.json", "--report",
            "rep.json", "--tolerance", "1e-5",
        ],
        &dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("rep.json")).unwrap()).unwrap();
    assert!(rep["beta_sup"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn spectral_mvn_sweep() {
    let dir = tmpdir("spectral");
    surf(
        &[
            "family", "constant", "--beta0", "1", "--gamma0", "1", "--v0", "1.5", "--w0", "1.5",
            "--grid", "33x33:0,0,0.02", "--out", "iso.json",
        ],
        &dir,
    );
    let out = surf(
        &[
            "spectral",
            "--in",
            "iso.json",
            "--problem",
            "mvn",
            "--lambda",
            "0,1,-2.5",
            "--out",
            "spec.json",
        ],
        &dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("spec.json")).unwrap()).unwrap();
    assert!(rep["spread"].is_number());

    // Missing λ list is a usage error.
    let out = surf(&["spectral", "--in", "iso.json", "--problem", "mvn"], &dir);
    assert_eq!(code(&out), 2);
}
