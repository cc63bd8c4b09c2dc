use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gluing(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gluing"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn build_k2_depth_two_has_80_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let o = gluing(&["build", "--base", "k2", "--k", "2", "--out", "k2"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("k2,80,144"));
    for f in ["k2.base.graph", "k2.stretched.layers", "k2.tailed.graph", "k2.tailed.layers", "k2.k2.graph"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let header = fs::read_to_string(dir.path().join("k2.k2.graph")).unwrap();
    assert!(header.lines().next().unwrap().starts_with("80 "));
}

#[test]
fn build_cayley_vertex_count_follows_diameter() {
    let dir = tempfile::tempdir().unwrap();
    let o = gluing(&["build", "--base", "cayley", "--m", "8", "--gens", "1,2", "--k", "1"], dir.path());
    assert!(o.status.success());
    // diameter 2: 8 * 3 + 4
    assert!(stdout(&o).contains("tailed,28,"));
}

#[test]
fn build_depth_zero_is_unit_edge() {
    let dir = tempfile::tempdir().unwrap();
    let o = gluing(&["build", "--k", "0"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o), "graph,vertices,edges\nk0,2,1\n");
}

#[test]
fn spectral_on_c8_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    assert!(gluing(&["build", "--base", "cayley", "--m", "8", "--gens", "1", "--out", "c8"], dir.path())
        .status
        .success());
    let o = gluing(&["analyze", "spectral", "c8.base.graph"], dir.path());
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let mu2: f64 = rows[1][2].parse().unwrap();
    assert!((mu2 - (2.0 - 2.0 * (std::f64::consts::PI / 4.0).cos())).abs() < 1e-9);
}

#[test]
fn doubling_of_two_points_is_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("e.graph"), "2 0 1\n0 1 3/2\n").unwrap();
    let o = gluing(&["analyze", "doubling", "e.graph"], dir.path());
    assert!(o.status.success());
    assert_eq!(csv_rows(&stdout(&o))[1][1..3], ["2".to_string(), "2".to_string()]);
}

#[test]
fn doubling_of_first_power_respects_covering_bounds() {
    let dir = tempfile::tempdir().unwrap();
    assert!(gluing(&["build", "--base", "k2", "--k", "1", "--out", "g"], dir.path()).status.success());
    let o = gluing(&["analyze", "doubling", "g.k1.graph", "--tailed", "g.tailed.graph"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lambda: usize = csv_rows(&text)[1][2].parse().unwrap();
    assert!(lambda <= 2304);
    assert!(text.contains("Any,2304,"));
}

#[test]
fn parse_errors_report_line_and_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.graph"), "2 0 1\n0 1 x\n").unwrap();
    let o = gluing(&["analyze", "spectral", "bad.graph"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gluing(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(gluing(&["--version"], dir.path()).status.code(), Some(0));
    assert_eq!(gluing(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(gluing(&["growth", "--base", "k2", "--tol", "0"], dir.path()).status.code(), Some(1));
    assert_eq!(gluing(&["growth", "--base", "k2", "--p", "0.5"], dir.path()).status.code(), Some(1));
    assert_eq!(gluing(&["build", "--base", "k2", "--k", "9"], dir.path()).status.code(), Some(3));
}

#[test]
fn growth_help_documents_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = gluing(&["growth", "--help"], dir.path());
    let text = stdout(&o);
    assert!(text.contains("c2_lo_status"));
    assert!(text.contains("_UB"));
}

#[test]
fn growth_depth_zero_is_single_isometric_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = gluing(&["growth", "--base", "k2", "--k", "0"], dir.path());
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
    let col = |name: &str| rows[0].iter().position(|c| c == name).unwrap();
    assert_eq!(rows[1][col("c2_hi")], "1.000000000");
    assert_eq!(rows[1][col("seed")], "0");
    assert_eq!(rows[1][col("version")], env!("CARGO_PKG_VERSION"));
}

#[test]
fn growth_is_reproducible_and_flags_upper_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["growth", "--base", "k2", "--k", "1", "--p", "1.5,3", "--seed", "7", "--out"];
    let a = gluing(&[&args[..], &["a"]].concat(), dir.path());
    let b = gluing(&[&args[..], &["b"]].concat(), dir.path());
    assert!(a.status.success() && b.status.success());
    let csv_a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(csv_a, fs::read(dir.path().join("b.csv")).unwrap());
    assert!(dir.path().join("a.json").exists());
    let rows = csv_rows(&String::from_utf8(csv_a).unwrap());
    assert!(rows[0].contains(&"cp_p1.5_UB".to_string()) && rows[0].contains(&"cp_p3_UB".to_string()));
    let hi = rows[0].iter().position(|c| c == "c2_hi").unwrap();
    let lo = rows[0].iter().position(|c| c == "c2_lo").unwrap();
    let (lo1, hi0): (f64, f64) = (rows[2][lo].parse().unwrap(), rows[1][hi].parse().unwrap());
    assert!(lo1 > hi0);
    assert!(rows[1..].iter().all(|r| r[0] == "7"));
}

#[test]
fn spec_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.json"), r#"{"base": "k2", "k": 1, "tol": 0.001}"#).unwrap();
    let from_file = gluing(&["c2", "--spec", "s.json"], dir.path());
    let from_flags = gluing(&["c2", "--base", "k2", "--k", "1", "--tol", "0.001"], dir.path());
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_flags.stdout);

    fs::write(dir.path().join("bad.json"), r#"{"bsae": "k2"}"#).unwrap();
    assert_eq!(gluing(&["c2", "--spec", "bad.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn c2_of_four_cycle_brackets_sqrt_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c4.graph"), "4 0 2\n0 1 1\n1 2 1\n2 3 1\n3 0 1\n").unwrap();
    let o = gluing(&["c2", "c4.graph", "--out", "c4.points"], dir.path());
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let (lo, hi): (f64, f64) = (rows[1][1].parse().unwrap(), rows[1][2].parse().unwrap());
    let r2 = std::f64::consts::SQRT_2;
    assert!(lo <= r2 + 1e-9 && r2 <= hi + 1e-9);
    let pts = fs::read_to_string(dir.path().join("c4.points")).unwrap();
    assert!(pts.starts_with("4 "));
}

#[test]
fn poincare_checks_points_against_spectral_bound() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c4.graph"), "4 0 2\n0 1 1\n1 2 1\n2 3 1\n3 0 1\n").unwrap();
    fs::write(dir.path().join("f.points"), "4 1 2\n1\n0\n-1\n0\n").unwrap();
    let o = gluing(&["analyze", "poincare", "c4.graph", "--points", "f.points"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    let (ratio, bound): (f64, f64) = (rows[1][2].parse().unwrap(), rows[1][3].parse().unwrap());
    assert!(ratio <= bound * (1.0 + 1e-8));
}

#[test]
fn witness_on_four_cycle_holds() {
    let dir = tempfile::tempdir().unwrap();
    let o = gluing(&["witness", "--base", "cayley", "--m", "4", "--gens", "1", "--p", "2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["bound_holds"], serde_json::Value::Bool(true));
}
