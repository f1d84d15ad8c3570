use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

use mather_core::io::CurveRecord;
use tempfile::TempDir;

const STANDARD: &str = r#"
[map]
preset = "standard"
eps = 0.05

[diophantine]
m_max = 2000

[sweep]
real = { start = 0.5680339887498949, stop = 0.6680339887498949, count = 5 }
imag = { start = 0.0, stop = 0.2, count = 2 }
points = [[0.5, 0.0]]
"#;

const INTEGRABLE: &str = r#"
[map]
preset = "integrable"

[sweep]
real = { start = 0.05, stop = 0.95, count = 7 }
imag = { start = 0.0, stop = 0.5, count = 3 }
"#;

struct Run {
    code: Option<i32>,
    dir: TempDir,
}

fn mather(config: &str, args: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_mather"))
        .arg(args[0])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(&args[1..])
        .output()
        .unwrap();
    Run { code: status.status.code(), dir }
}

fn rows(path: &Path) -> Vec<HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    r.records().map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(String::from)).collect()).collect()
}

fn f(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

#[test]
fn integrable_beta_is_half_omega_squared() {
    let run = mather(INTEGRABLE, &["compute-beta"]);
    assert_eq!(run.code, Some(0));
    let table = rows(&run.dir.path().join("out/beta.csv"));
    assert_eq!(table.len(), 21);
    let computed: Vec<_> = table.iter().filter(|r| r["method"] == "kam").collect();
    assert!(computed.len() >= 14, "every off-axis point has a curve");
    for row in computed {
        let (x, y) = (f(row, "omega_re"), f(row, "omega_im"));
        assert!((f(row, "beta_re") - 0.5 * (x * x - y * y)).abs() < 1e-14);
        assert!((f(row, "beta_im") - x * y).abs() < 1e-14);
        assert!((f(row, "beta_prime_re") - x).abs() < 1e-14);
    }
}

#[test]
fn beta_csv_is_independent_of_thread_count() {
    let one = mather(STANDARD, &["compute-beta", "--threads", "1"]);
    let four = mather(STANDARD, &["compute-beta", "--threads", "4"]);
    assert_eq!(one.code, Some(0));
    assert_eq!(four.code, Some(0));
    let a = std::fs::read(one.dir.path().join("out/beta.csv")).unwrap();
    let b = std::fs::read(four.dir.path().join("out/beta.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn resonant_points_are_reported_as_skipped() {
    let run = mather(STANDARD, &["compute-beta"]);
    let table = rows(&run.dir.path().join("out/beta.csv"));
    let half = table.iter().find(|r| f(r, "omega_re") == 0.5 && f(r, "omega_im") == 0.0).unwrap();
    assert_eq!(half["method"], "skipped");
    assert!(half["diophantine_verdict"].starts_with("excluded-1/2"));
    assert!(half["beta_re"].is_empty());
    for row in &table {
        let excluded = row["diophantine_verdict"].starts_with("excluded");
        assert_eq!(row["method"] == "skipped", excluded, "{row:?}");
    }
}

#[test]
fn solved_curve_round_trips_through_json() {
    let run = mather(STANDARD, &["solve-curve", "--omega", "0.6180339887498949"]);
    assert_eq!(run.code, Some(0));
    let text = std::fs::read_to_string(run.dir.path().join("out/curve.json")).unwrap();
    let rec = CurveRecord::from_json(&text).unwrap();
    assert!(rec.residual_sup < 1e-12);
    assert_eq!(CurveRecord::from_json(&rec.to_json().unwrap()).unwrap(), rec);
    assert_eq!(rows(&run.dir.path().join("out/curve_grid.csv")).len(), 512);
}

#[test]
fn solve_curve_refuses_excluded_frequency() {
    let run = mather(STANDARD, &["solve-curve", "--omega", "0.5"]);
    assert_eq!(run.code, Some(1));
    assert!(!run.dir.path().join("out/curve.json").exists());
}

#[test]
fn membership_and_window_tables() {
    let run = mather(STANDARD, &["check-diophantine", "--omega", "0.5", "--window", "0.4,0.6"]);
    assert_eq!(run.code, Some(0));
    let m = rows(&run.dir.path().join("out/membership.csv"));
    assert!(m[0]["verdict"].starts_with("excluded"));
    let measure = rows(&run.dir.path().join("out/measure.csv"));
    let intervals = rows(&run.dir.path().join("out/intervals.csv"));
    let sum: f64 = intervals.iter().map(|r| f(r, "right") - f(r, "left")).sum();
    assert!((sum - f(&measure[0], "excluded_length")).abs() < 1e-12);
}

#[test]
fn configuration_errors_exit_with_one() {
    let unknown = mather("[map]\npreset = \"standard\"\neps = 0.1\ncolour = 3\n", &["compute-beta"]);
    assert_eq!(unknown.code, Some(1));
    let bad_omega = mather(STANDARD, &["solve-curve", "--omega", "abc"]);
    assert_eq!(bad_omega.code, Some(1));
    let bad_window = mather(STANDARD, &["check-diophantine", "--window", "0.6,0.4"]);
    assert_eq!(bad_window.code, Some(1));
    let zero_threads = mather(STANDARD, &["compute-beta", "--threads", "0"]);
    assert_eq!(zero_threads.code, Some(1));
}

#[test]
fn breakdown_is_a_numerical_failure() {
    let cfg = "[map]\npreset = \"standard\"\neps = 1.2\n";
    let run = mather(cfg, &["solve-curve", "--omega", "0.6180339887498949"]);
    assert_eq!(run.code, Some(2));
    assert!(!run.dir.path().join("out/curve.json").exists());
}
