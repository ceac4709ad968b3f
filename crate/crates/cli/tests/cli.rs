use std::f64::consts::PI;
use std::fs;
use std::process::{Command, Output};

use liftline_core::optimizer::{solve_prandtl1933, SolveReport};

fn liftline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liftline"))
        .args(args)
        .output()
        .expect("failed to spawn liftline")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(csv_text: &str, name: &str) -> f64 {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    for rec in r.records() {
        let rec = rec.unwrap();
        if &rec[0] == name {
            return rec[1].parse().unwrap();
        }
    }
    panic!("no field {name}");
}

fn table(csv_text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn solve_prandtl_reports_one_over_18_pi() {
    let o = liftline(&["solve", "--model", "prandtl"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let d = field(&text, "drag");
    assert!((d - 1.0 / (18.0 * PI)).abs() < 1e-15);
    assert!((field(&text, "mu") - 1.0).abs() < 1e-15);
    assert!((field(&text, "span_b") - 4.0 * 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn solve_elliptic_reports_one_over_16_pi() {
    let o = liftline(&["solve", "--model", "elliptic"]);
    assert!(o.status.success());
    let d = field(&stdout(&o), "drag");
    assert!((d - 1.0 / (16.0 * PI)).abs() < 1e-15);
}

#[test]
fn json_report_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prandtl.json");
    let o = liftline(&["solve", "--model", "prandtl", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["model"], "prandtl");
    let report: SolveReport = serde_json::from_value(doc["results"].clone()).unwrap();
    report.check_consistency().unwrap();
    assert_eq!(report, solve_prandtl1933().unwrap());
}

#[test]
fn constants_rescale_the_prandtl_solution() {
    let o = liftline(&["solve", "--model", "prandtl", "--lift", "2", "--radius", "3", "--density", "1.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let want = 4.0 / (18.0 * PI * 1.5 * 9.0);
    assert!((field(&text, "drag") - want).abs() < 1e-15);
    assert!((field(&text, "span_b") - 12.0 * 3f64.sqrt()).abs() < 1e-12);
    assert!((field(&text, "drag_ratio_vs_elliptic") - 8.0 / 9.0).abs() < 1e-12);
}

#[test]
fn self_weight_model_rejects_non_unit_constants() {
    let o = liftline(&["solve", "--model", "improved", "--cw", "2", "--grid", "5x5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    let cases: [&[&str]; 5] = [
        &["solve", "--model", "warp"],
        &["solve", "--model", "prandtl", "--out", "x.json", "--format", "csv"],
        &["solve", "--model", "prandtl", "--coeffs", "0.1,0.2"],
        &["sweep", "--model", "elliptic", "--grid", "3x3"],
        &["solve", "--model", "prandtl", "--lift", "-1"],
    ];
    for args in cases {
        assert_eq!(liftline(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn solve_improved_on_a_coarse_grid() {
    let o = liftline(&["solve", "--model", "improved", "--grid", "30x30", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let report: SolveReport = serde_json::from_value(doc["results"].clone()).unwrap();
    report.check_consistency().unwrap();
    assert!(report.constraint_values.contains_key("weight_reduced"));
    assert!(report.coeffs.a2() >= -report.coeffs.a0() / 3.0 - 1e-12);
}

#[test]
fn prandtl_sweep_boundary_passes_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let o = liftline(&[
        "sweep",
        "--model",
        "prandtl",
        "--grid",
        "41x41",
        "--a0-range",
        "0.15,0.22",
        "--a2-range",
        "-0.1,0.0",
        "--out",
        grid.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let (_, rows) = table(&fs::read_to_string(&grid).unwrap());
    assert_eq!(rows.len(), 41 * 41);
    let text = fs::read_to_string(dir.path().join("grid-boundary-weight.csv")).unwrap();
    let (header, pts) = table(&text);
    assert_eq!(header, ["a0", "a2"]);
    let s3 = 3f64.sqrt();
    let (x, y) = (1.0 / (PI * s3), -1.0 / (3.0 * PI * s3));
    let cell = ((0.07f64 / 40.0).powi(2) + (0.1f64 / 40.0).powi(2)).sqrt();
    let nearest = pts
        .iter()
        .map(|p| {
            let (a, b): (f64, f64) = (p[0].parse().unwrap(), p[1].parse().unwrap());
            ((a - x).powi(2) + (b - y).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(nearest < cell, "{nearest} vs {cell}");
}

#[test]
fn improved_sweep_has_one_row_per_cell_and_is_deterministic() {
    let args = ["sweep", "--model", "improved", "--grid", "6x5", "--a0-range", "0.05,0.3"];
    let a = liftline(&args);
    let b = liftline(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let (header, rows) = table(&stdout(&a));
    assert_eq!(rows.len(), 30);
    let i = header.iter().position(|h| h == "a0").unwrap();
    assert!(rows.iter().all(|r| r[i].parse::<f64>().unwrap() > 0.0));
}

#[test]
fn sweep_rejects_non_positive_a0() {
    let o = liftline(&["sweep", "--a0-range", "-0.1,0.2", "--grid", "3x3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn moment_of_zero_loading_is_zero() {
    let o = liftline(&["moment", "--coeffs", "0,0", "--span", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = table(&stdout(&o));
    assert_eq!(header[0], "xi");
    for r in &rows {
        assert!(r[1..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0));
    }
}

#[test]
fn moment_methods_agree_and_cover_the_half_span() {
    let o = liftline(&["moment", "--coeffs", "0.2,-0.05", "--span", "4"]);
    assert!(o.status.success());
    let (header, rows) = table(&stdout(&o));
    let xs: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(xs[0], 0.0);
    assert_eq!(*xs.last().unwrap(), 1.0);
    let col = header.iter().position(|h| h == "dev:closed-form:ode").unwrap();
    let worst = rows.iter().map(|r| r[col].parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!(worst < 1e-7, "{worst}");
    let col = header.iter().position(|h| h == "dev:closed-form:volterra-oracle").unwrap();
    assert!(rows.iter().all(|r| r[col].parse::<f64>().unwrap() < 1e-4));
}

#[test]
fn moment_rejects_bad_coefficients() {
    assert_eq!(liftline(&["moment", "--coeffs", "nan,0", "--span", "3"]).status.code(), Some(2));
    assert_eq!(liftline(&["moment", "--coeffs", "-0.1,0"]).status.code(), Some(2));
}

#[test]
fn selftest_reports_the_eight_ninths_ratio() {
    let o = liftline(&["selftest", "--check", "1", "--check", "2", "--check", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("8/9"));
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn selftest_detects_a_perturbed_constant() {
    let o = liftline(&["selftest", "--check", "1", "--perturb", "1e-6"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("FAIL"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("prandtl optimum"));
}

#[test]
fn compare_lists_requested_models() {
    let o = liftline(&["compare", "--models", "elliptic,prandtl"]);
    assert!(o.status.success());
    let (header, rows) = table(&stdout(&o));
    assert_eq!(header[0], "model");
    assert_eq!(rows.len(), 2);
    let r: f64 = rows[1][5].parse().unwrap();
    assert!((r - 1.0).abs() < 1e-12);
}
