//! Runs the `beurling` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

const LOG_SHIFT: &str = r#"{"family":"log_shift","a":1.0}"#;
const LATTICE: &str = r#"{"family":"integer_lattice","window_radius":64}"#;

fn beurling(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beurling")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(beurling(&["--help"]).status.code(), Some(0));
    assert_eq!(beurling(&["--version"]).status.code(), Some(0));
    assert_eq!(beurling(&["check", "--help"]).status.code(), Some(0));
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(beurling(&[]).status.code(), Some(1));
    assert_eq!(beurling(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(beurling(&["check", "--weight", LOG_SHIFT]).status.code(), Some(1));
    let o = beurling(&["check", "--weight", r#"{"family":"log_shift","a":-1}"#, "--family", LATTICE]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    let o = beurling(&["generate", "--family", r#"{"family":"angle_segments","n_min":1,"n_max":30}"#]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(beurling(&["check", "--weight", "/no/such/file.json", "--family", LATTICE]).status.code(), Some(1));
}

#[test]
fn malformed_variety_names_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "bad.csv", "re,im,mult\n1,0,1\n2,zero,1\n");
    let o = beurling(&["check", "--weight", LOG_SHIFT, "--input", &csv]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let json = write(dir.path(), "bad.json", r#"{"points":[{"re":1,"im":0},{"re":"x","im":0}]}"#);
    let o = beurling(&["check", "--weight", LOG_SHIFT, "--input", &json]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numeric_failure_exits_two() {
    // ω too small to anchor the interval partition
    let tiny = r#"{"family":"tabulated","knots":[[0,0.0001],[1000,0.0001]]}"#;
    let o = beurling(&["regularize", "--weight", tiny, "--range", "100", "--nx", "3"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    // a grid past the reliable region is a bad request, not a numeric failure
    let o = beurling(&["regularize", "--weight", LOG_SHIFT, "--range", "100", "--xmin", "-99", "--xmax", "99", "--nx", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn generate_formats() {
    let o = beurling(&["generate", "--family", r#"{"family":"angle_segments","n_min":1,"n_max":1}"#, "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "re,im,mult\n1,2,1\n-1,2,1\n");
    let o = beurling(&["generate", "--family", LATTICE]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 129);
    assert_eq!(v["window_radius"], 64.0);
}

#[test]
fn lattice_check_report() {
    let o = beurling(&["check", "--weight", LOG_SHIFT, "--family", LATTICE]);
    assert!(o.status.success());
    assert!(o.stderr.is_empty());
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["points"], 129);
    let c = &r["conditions"];
    assert_eq!(c["radii"].as_array().unwrap().len(), 8);
    assert!(c["constants_b"].as_array().unwrap().iter().all(|b| b.as_f64() == Some(0.0)));
    assert_eq!(c["verdict_b"], "bounded-evidence");
}

#[test]
fn check_output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let fam = r#"{"family":"strip_random","count":200,"strip_height":3,"seed":5,"window_radius":100}"#;
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = beurling(&["check", "--weight", LOG_SHIFT, "--family", fam, "--out", p.to_str().unwrap()]);
        assert!(o.status.success() && o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn csv_and_json_inputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let fam = r#"{"family":"perturbed_lattice","amplitude":0.2,"seed":3,"window_radius":40}"#;
    let json = dir.path().join("v.json");
    let csv = dir.path().join("v.csv");
    beurling(&["generate", "--family", fam, "--out", json.to_str().unwrap()]);
    beurling(&["generate", "--family", fam, "--format", "csv", "--out", csv.to_str().unwrap()]);
    // CSV carries no window, so pass both through explicit radii
    let radii = "1,2,4,8,16";
    let a = beurling(&["check", "--weight", LOG_SHIFT, "--input", json.to_str().unwrap(), "--radii", radii, "--format", "csv"]);
    let b = beurling(&["check", "--weight", LOG_SHIFT, "--input", csv.to_str().unwrap(), "--radii", radii, "--format", "csv"]);
    assert!(a.status.success() && b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 6);
}

#[test]
fn duplicate_points_warn_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "dup.csv", "re,im\n0,0\n0,0\n3,1\n");
    let o = beurling(&["check", "--weight", LOG_SHIFT, "--input", &csv, "--radii", "0.2,0.4,0.8,1.5"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["total_multiplicity"], 3);
    assert_eq!(r["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn balayage_profile_csv() {
    let fam = r#"{"family":"angle_segments","n_min":1,"n_max":6}"#;
    let o = beurling(&["profile-balayage", "--weight", LOG_SHIFT, "--family", fam, "--xmin", "-10", "--xmax", "10", "--samples", "21"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kind,x,value");
    assert_eq!(lines.len(), 23);
    assert!(lines[1].starts_with("sample,-10,"));
    let sup: Vec<&str> = lines[22].split(',').collect();
    assert_eq!(sup[0], "sup");
    let best = lines[1..22].iter().map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!(sup[2].parse::<f64>().unwrap() >= best);
}

#[test]
fn regularize_grid_csv() {
    let o = beurling(&["regularize", "--weight", LOG_SHIFT, "--range", "200", "--xmin", "-20", "--xmax", "20", "--nx", "5", "--ymin", "0", "--ymax", "4", "--ny", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,r,p_tilde,p,ratio"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 15);
    for r in rows {
        assert!(r[2] >= -1e-8 && r[3] >= r[1].abs() - 1e-8);
    }
}

#[test]
fn regularize_with_psi_column() {
    let fam = r#"{"family":"integer_lattice","window_radius":5}"#;
    let o = beurling(&[
        "regularize", "--weight", LOG_SHIFT, "--range", "200", "--family", fam, "--eps", "0.1", "--beta", "10",
        "--xmin", "0", "--xmax", "1", "--nx", "3", "--ymin", "0", "--ymax", "0.05", "--ny", "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("x,y,r,p_tilde,p,ratio,psi\n"));
    // (0, 0) and (1, 0) are points of the variety
    assert_eq!(text.lines().filter(|l| l.ends_with(",-inf")).count(), 2);
}
