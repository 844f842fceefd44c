use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn copdep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_copdep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn path_str(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn write(path: &str, text: &str) {
    std::fs::write(Path::new(path), text).unwrap();
}

fn synth(dir: &TempDir, name: &str, extra: &[&str]) -> String {
    let path = path_str(dir, name);
    let mut args = vec!["synth", "--output", &path];
    args.extend_from_slice(extra);
    let out = copdep(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

#[test]
fn independent_data_measures_near_zero() {
    let dir = TempDir::new().unwrap();
    let csv = synth(
        &dir,
        "pi.csv",
        &["--model", "independent", "--rows", "4096", "--seed", "5"],
    );
    let out = copdep(&["measure", "--input", &csv, "--resolution", "8"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["kind"], "tau_quadratic");
    assert_eq!(report["sample_size"], 4096);
    assert!(report["value"].as_f64().unwrap().abs() < 0.01);
}

#[test]
fn comonotone_data_hits_grid_maximum() {
    let dir = TempDir::new().unwrap();
    let csv = synth(&dir, "co.csv", &["--model", "comonotone", "--rows", "4096"]);
    let json = path_str(&dir, "co.json");
    let out = copdep(&[
        "estimate",
        "--input",
        &csv,
        "--resolution",
        "64",
        "--output",
        &json,
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["diagnostics"]["pass"], true);
    let report = stdout_json(&copdep(&["measure", "--input", &json]));
    let v = report["value"].as_f64().unwrap();
    assert!((v - 0.984375).abs() < 1e-12, "{v}");
}

#[test]
fn estimate_without_output_prints_copula() {
    let dir = TempDir::new().unwrap();
    let csv = synth(&dir, "mix.csv", &["--model", "mixture", "--rows", "300"]);
    let out = copdep(&["estimate", "--input", &csv, "--resolution", "4"]);
    assert!(out.status.success());
    let c = stdout_json(&out);
    assert_eq!(c["resolutions"], serde_json::json!([4, 4]));
}

#[test]
fn non_finite_value_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let csv = path_str(&dir, "nan.csv");
    write(&csv, "a,b\n0.1,0.2\nNaN,0.3\n0.5,0.6\n");
    let out = copdep(&["measure", "--input", &csv]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("'a'"), "{err}");
}

#[test]
fn header_only_csv_is_insufficient() {
    let dir = TempDir::new().unwrap();
    let csv = path_str(&dir, "empty.csv");
    write(&csv, "a,b\n");
    let out = copdep(&["estimate", "--input", &csv]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient"));
}

#[test]
fn bad_arguments_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let csv = synth(&dir, "d.csv", &["--model", "independent", "--rows", "50"]);
    assert_eq!(
        copdep(&["measure", "--input", &csv, "--kind", "renyi_alpha"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        copdep(&["measure", "--input", &csv, "--v-cols", "zz"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        copdep(&["measure", "--input", &csv, "--normalize"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        copdep(&["verify", "--suite", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(copdep(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn group_measure_reports_bound() {
    let dir = TempDir::new().unwrap();
    let csv = synth(
        &dir,
        "co3.csv",
        &["--model", "comonotone", "--dims", "3", "--rows", "512"],
    );
    let out = copdep(&[
        "measure",
        "--input",
        &csv,
        "--v-cols",
        "x2,y",
        "--kind",
        "group_tau",
        "--resolution",
        "8",
    ]);
    assert!(out.status.success());
    let r = stdout_json(&out);
    let bound = r["upper_bound"].as_f64().unwrap();
    let normalized = r["normalized_value"].as_f64().unwrap();
    assert!((r["value"].as_f64().unwrap() / bound - normalized).abs() < 1e-15);
    assert_eq!(r["u_axes"], serde_json::json!([0]));
}

#[test]
fn dpi_suite_passes() {
    let out = copdep(&["verify", "--suite", "dpi", "--seed", "3", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_eq!(r["pass"], true);
    assert_eq!(r["suite"], "dpi");
}

#[test]
fn star_with_identity_returns_right_operand() {
    let dir = TempDir::new().unwrap();
    let id = path_str(&dir, "id.json");
    let b = path_str(&dir, "b.json");
    let out = path_str(&dir, "ab.json");
    let mut id_mass = vec![0.0; 16];
    for i in 0..4 {
        id_mass[i * 4 + i] = 0.25;
    }
    write(
        &id,
        &serde_json::json!({"dims": 2, "resolutions": [4, 4], "mass": id_mass}).to_string(),
    );
    let b_mass: Vec<f64> = [
        [0.1, 0.05, 0.05, 0.05],
        [0.05, 0.1, 0.05, 0.05],
        [0.05, 0.05, 0.1, 0.05],
        [0.05, 0.05, 0.05, 0.1],
    ]
    .concat();
    write(
        &b,
        &serde_json::json!({"dims": 2, "resolutions": [4, 4], "mass": b_mass}).to_string(),
    );
    let run = copdep(&["star", "--input", &id, "--input", &b, "--output", &out]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(stdout_json(&run)["compatibility"]["pass"], true);
    let product: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let got: Vec<f64> = product["mass"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(got, b_mass);
}

#[test]
fn incompatible_star_fails() {
    let dir = TempDir::new().unwrap();
    let a = path_str(&dir, "a.json");
    let b = path_str(&dir, "b.json");
    write(
        &a,
        &serde_json::json!({"dims": 2, "resolutions": [2, 2], "mass": [0.25, 0.25, 0.25, 0.25]})
            .to_string(),
    );
    let uniform9 = vec![1.0 / 9.0; 9];
    write(
        &b,
        &serde_json::json!({"dims": 2, "resolutions": [3, 3], "mass": uniform9}).to_string(),
    );
    let out = copdep(&["star", "--input", &a, "--input", &b]);
    assert!(!out.status.success());
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let csv = synth(
            &dir,
            name,
            &[
                "--model",
                "functional",
                "--function",
                "sin_plus_square",
                "--sigma",
                "0.2",
                "--rows",
                "2000",
                "--seed",
                "99",
            ],
        );
        let out = copdep(&[
            "measure",
            "--input",
            &csv,
            "--kind",
            "tau_alpha",
            "--alpha",
            "1.5",
        ]);
        assert!(out.status.success());
        (std::fs::read(&csv).unwrap(), out.stdout)
    };
    assert_eq!(run("r1.csv"), run("r2.csv"));
}

#[test]
fn thread_cap_is_honored_and_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_copdep"))
        .args(["verify", "--suite", "axioms", "--trials", "2"])
        .env("COPDEP_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_copdep"))
        .args(["verify", "--suite", "axioms", "--trials", "2"])
        .env("COPDEP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
