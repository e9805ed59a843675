use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CONST: &str = "type = \"preset\"\nH = 3.141592653589793\npreset = \"constant\"\nparams = [1.0]\n";
const WELL: &str = "type = \"piecewise-constant\"\nH = 3\nbreakpoints = [0, 1, 2, 3]\nvalues = [4, 1, 4]\n";
const RAMP: &str = "type = \"preset\"\nH = 3.141592653589793\npreset = \"linear-ramp\"\nparams = [1, 2]\n";

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiberspec")).args(args).output().unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn spectrum_of_constant_profile() {
    let dir = TempDir::new().unwrap();
    let prof = write(&dir, "const.prof", CONST);
    let out = run(&["spectrum", "--profile", arg(&prof), "--cross", "interval:pi", "--lmax", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv, "k,mu,ell,lambda\n1,1,1,2\n1,1,2,5\n2,2,1,5\n2,2,2,8\n");
}

#[test]
fn eps_adds_sector_column() {
    let dir = TempDir::new().unwrap();
    let prof = write(&dir, "const.prof", CONST);
    let out = run(&["spectrum", "--profile", arg(&prof), "--lmax", "9", "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,mu,ell,lambda,sector"));
    let sectors: Vec<&str> = lines.map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(sectors, ["non-guided", "non-guided", "residual", "non-guided"]);
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.prof");
    assert_eq!(run(&["spectrum", "--profile", arg(&missing), "--lmax", "9"]).status.code(), Some(2));
    let bad = write(&dir, "bad.prof", "type = \"preset\"\nH = 1\npreset = \"unknown\"\n");
    assert_eq!(run(&["spectrum", "--profile", arg(&bad), "--lmax", "9"]).status.code(), Some(2));
    let prof = write(&dir, "well.prof", WELL);
    assert_eq!(run(&["spectrum", "--profile", arg(&prof)]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--profile", arg(&prof), "--lmax", "90", "--cross", "disk:1"]).status.code(), Some(2));
    let out = run(&["diagnose", "--profile", arg(&prof), "--lmax", "60", "--layer", "2,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("bad layer"));
}

#[test]
fn diagnose_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let prof = write(&dir, "well.prof", WELL);
    let mut outputs = Vec::new();
    for i in 0..2 {
        let csv = dir.path().join(format!("d{i}.csv"));
        let summary = dir.path().join(format!("s{i}.txt"));
        let out = run(&[
            "diagnose", "--profile", arg(&prof), "--lmax", "80", "--eps", "0.5", "--c1", "4", "--layer", "2.25,3",
            "--window", "0,1.5", "--out", arg(&csv), "--summary", arg(&summary),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push((std::fs::read(&csv).unwrap(), std::fs::read_to_string(&summary).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(csv.starts_with("k,mu,ell,lambda,sector,mass,R_omega,min_r2,max_gap\n"));
    assert!(outputs[0].1.contains("guided decay fitted exponent"));

    let a = run(&["spectrum", "--profile", arg(&prof), "--lmax", "80", "--eps", "0.5", "--c1", "4"]);
    let b = run(&["spectrum", "--profile", arg(&prof), "--lmax", "80", "--eps", "0.5", "--c1", "4"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8(a.stdout).unwrap().contains(",guided"));
}

#[test]
fn approx_ladder() {
    let dir = TempDir::new().unwrap();
    let prof = write(&dir, "ramp.prof", RAMP);
    let out = run(&["approx", "--profile", arg(&prof), "--mu", "1", "--ell", "3", "--ns", "4,16,64"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> =
        csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[2][2] < rows[1][2] && rows[1][2] < rows[0][2]);
    assert!(String::from_utf8(out.stderr).unwrap().contains("observed orders"));
}

#[test]
fn compare_against_oracle() {
    let dir = TempDir::new().unwrap();
    let prof = write(&dir, "well.prof", WELL);
    let out = run(&["compare", "--profile", arg(&prof), "--kmax", "2", "--num", "5", "--oracle-n", "4096"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.starts_with("k,mu,ell,lambda,lambda_fd,rel_error\n"));
    assert!(String::from_utf8(out.stderr).unwrap().ends_with("PASS\n"));
}
