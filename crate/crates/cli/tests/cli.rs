//! End-to-end tests of the command-line contract: output formats and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use spectral_torsion::Shape;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectral-torsion")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn f(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing number `{key}` in {v}"))
}

#[test]
fn exact_disk_summary() {
    let v = json_of(&cli(&["exact", "--shape", r#"{"type":"ball","d":2,"r":1.0}"#]));
    assert!((f(&v, "lambda1") - 5.7832).abs() < 1e-4);
    assert!((f(&v, "torsion") - std::f64::consts::FRAC_PI_8).abs() < 1e-11);
    assert_eq!(v["method"], "exact");
    assert_eq!(v["dim"], 2);
    for key in ["measure", "err"] {
        f(&v, key);
    }
}

#[test]
fn exact_square_torsion() {
    let v = json_of(&cli(&["exact", "--shape", r#"{"type":"rect","a":1,"b":1}"#]));
    assert!((f(&v, "torsion") - 0.03514).abs() < 1e-5);
}

#[test]
fn numbers_carry_at_most_twelve_significant_digits() {
    let v = json_of(&cli(&["exact", "--shape", r#"{"type":"rect","a":0.3,"b":0.7}"#]));
    for key in ["lambda1", "lambda2", "torsion", "measure"] {
        let x = f(&v, key);
        let rounded: f64 = format!("{x:.11e}").parse().unwrap();
        assert_eq!(x, rounded, "{key}");
    }
}

#[test]
fn echoed_shape_reparses_to_the_input() {
    let input = r#"{"type":"union","parts":[{"type":"ball","d":2,"r":0.5},{"type":"rect","a":2,"b":1}]}"#;
    let v = json_of(&cli(&["exact", "--shape", input]));
    let echoed = Shape::from_json(&v["shape"].to_string()).unwrap();
    assert_eq!(echoed, Shape::from_json(input).unwrap());
}

#[test]
fn parse_failures_exit_2() {
    assert_eq!(cli(&["exact", "--shape", r#"{"type":"ball""#]).status.code(), Some(2));
    assert_eq!(cli(&["exact", "--shape", r#"{"type":"ball","d":2,"r":-1}"#]).status.code(), Some(2));
    assert_eq!(cli(&["exact", "--shape", r#"{"type":"torus","r":1}"#]).status.code(), Some(2));
    assert_eq!(cli(&["verify", "--suite", "everything"]).status.code(), Some(2));
    assert_eq!(cli(&["diagram", "--families", "spheres"]).status.code(), Some(2));
    assert_eq!(cli(&["fd", "--shape", r#"{"type":"rect","a":1,"b":1}"#]).status.code(), Some(2));
}

#[test]
fn unsupported_shapes_exit_3() {
    let out = cli(&["fd", "--shape", r#"{"type":"ball","d":3,"r":1}"#, "--h", "0.1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
}

#[test]
fn square_discrete_eigenvalue() {
    let v = json_of(&cli(&["fd", "--shape", r#"{"type":"rect","a":1,"b":1}"#, "--h", "0.25"]));
    assert!((f(&v, "lambda1") - 18.745).abs() < 1e-3);
    assert_eq!(v["method"], "finite_difference");
}

#[test]
fn coarse_grid_exits_4() {
    let out = cli(&["fd", "--shape", r#"{"type":"ball","d":2,"r":0.01}"#, "--h", "0.5"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn refined_disk_reports_error_estimate() {
    let v = json_of(&cli(&["fd", "--shape", r#"{"type":"ball","d":2,"r":1}"#, "--h", "0.03125", "--refine"]));
    let j2 = 5.783185962946784;
    assert!((f(&v, "lambda1") - j2).abs() / j2 < 1e-3);
    let err = f(&v, "err");
    assert!(err > 0.0 && err < 1e-2);
    assert_eq!(v["refined"], true);
}

#[test]
fn raster_mask_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("square.mask");
    let mut text = String::from("0.25 5 5\n");
    for j in 0..5 {
        let row: Vec<&str> = (0..5).map(|i| if (1..4).contains(&i) && (1..4).contains(&j) { "1" } else { "0" }).collect();
        text.push_str(&row.concat());
        text.push('\n');
    }
    std::fs::write(&path, text).unwrap();
    let v = json_of(&cli(&["fd", "--raster", path.to_str().unwrap()]));
    assert!((f(&v, "lambda1") - 18.745).abs() < 1e-3, "{v}");
    assert_eq!(cli(&["fd", "--raster", path.to_str().unwrap(), "--refine"]).status.code(), Some(3));
    assert_eq!(cli(&["fd", "--raster", "/nonexistent/mask"]).status.code(), Some(5));
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn two_disk_diagram_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    json_of(&cli(&["diagram", "--families", "two_disks", "--n", "100", "--out", dir.path().to_str().unwrap()]));
    let rows = read_csv(&dir.path().join("points.csv"));
    assert_eq!(rows.len(), 100);
    let j2: f64 = 5.783185962946784;
    let pi = std::f64::consts::PI;
    for row in &rows {
        assert_eq!(row[0], "two_disks");
        let (x, y): (f64, f64) = (row[3].parse().unwrap(), row[4].parse().unwrap());
        let curve = 8.0 * pi * x / (x * x - 2.0 * pi * j2 * x + 2.0 * pi * pi * j2 * j2);
        assert!((y - curve).abs() / curve < 1e-10);
    }
    let bounds = read_csv(&dir.path().join("bounds.csv"));
    let first = &bounds[0];
    let num = |s: &str| s.parse::<f64>().unwrap();
    assert!((num(&first[0]) - 18.168).abs() < 1e-3);
    assert!((num(&first[1]) - 1.3833).abs() < 1e-4 && (num(&first[2]) - 1.3833).abs() < 1e-4);
}

#[test]
fn merged_diagram_is_sorted_by_family_then_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    json_of(&cli(&["diagram", "--families", "omega_n,rectangles", "--n", "12", "--out", out]));
    let rows = read_csv(&dir.path().join("points.csv"));
    let families: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    let split = families.iter().position(|&f| f == "omega_n").unwrap();
    assert!(families[..split].iter().all(|&f| f == "rectangles"));
    assert!(families[split..].iter().all(|&f| f == "omega_n"));
    for part in [&rows[..split], &rows[split..]] {
        let params: Vec<f64> = part.iter().map(|r| r[1].parse().unwrap()).collect();
        assert!(params.windows(2).all(|w| w[0] <= w[1]), "{params:?}");
    }
}

#[test]
fn diagram_write_failure_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = cli(&["diagram", "--families", "omega_n", "--n", "4", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn scalarize_examples() {
    let v = json_of(&cli(&["scalarize", "--k", "0.002", "--eigen", "1", "--d", "2", "--brute"]));
    assert_eq!(v["regime"], "below_threshold");
    assert_eq!(v["minimizer"]["type"], "ball");
    assert_eq!(v["brute"]["agrees"], true);

    let v = json_of(&cli(&["scalarize", "--k", "0.05", "--eigen", "1", "--d", "2"]));
    assert_eq!(v["regime"], "above_threshold");
    let r = f(&v, "radius");
    assert!((std::f64::consts::PI * r * r - 1.0).abs() < 1e-10);

    let v = json_of(&cli(&["scalarize", "--l", "0.0005", "--eigen", "2", "--d", "2"]));
    assert_eq!(v["minimizer"]["type"], "union");
    let parts = v["minimizer"]["parts"].as_array().unwrap();
    assert_eq!(parts.len(), 2);
    assert_eq!(parts[0], parts[1]);
    let s = &v["summary"];
    assert!((f(s, "lambda2") - f(s, "lambda1")).abs() < 1e-9 * f(s, "lambda1"));
}

#[test]
fn verify_heat_suite_passes() {
    let out = cli(&["verify", "--suite", "heat"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().any(|l| l.starts_with("PASS ")));
    assert!(!text.contains("FAIL"));
}

#[test]
fn injected_corruption_fails_verification() {
    let out = cli(&["verify", "--suite", "inequalities", "--inject-corrupt"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("FAIL lambda1*T <= |Omega|")), "{text}");
}

#[test]
fn outputs_are_deterministic_and_thread_count_independent() {
    let args = ["fd", "--shape", r#"{"type":"union","parts":[{"type":"ball","d":2,"r":0.3},{"type":"rect","a":0.4,"b":0.6}]}"#, "--h", "0.02"];
    let first = cli(&args);
    let second = Command::new(env!("CARGO_BIN_EXE_spectral-torsion"))
        .args(args)
        .env("SPECTRAL_TORSION_THREADS", "2")
        .output()
        .unwrap();
    assert!(first.status.success() && second.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn invalid_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_spectral-torsion"))
        .args(["exact", "--shape", r#"{"type":"ball","d":2,"r":1}"#])
        .env("SPECTRAL_TORSION_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
