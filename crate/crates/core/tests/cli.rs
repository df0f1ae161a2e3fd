use std::path::Path;
use std::process::{Command, Output};

use brokenguide::output::{parse_csv, ASYMPTOTIC_HEADER, BOUNDS_HEADER, CONVERGENCE_HEADER, DECAY_HEADER, EIGEN_HEADER, FIELD_HEADER};

const SMALL: &[&str] = &["--level", "2", "--degree", "2", "--length", "2", "--nval", "3", "--nsub", "8"];

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brokenguide")).args(args).env_remove("BROKENGUIDE_THREADS").output().unwrap()
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn with_small<'a>(head: &[&'a str]) -> Vec<&'a str> {
    head.iter().copied().chain(SMALL.iter().copied()).collect()
}

fn header_of(text: &str) -> Vec<String> {
    parse_csv(text).unwrap().0
}

#[test]
fn solve_writes_eigen_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eig.csv");
    let mut args = with_small(&["solve", "--theta", "pi/4"]);
    args.extend(["--out", out.to_str().unwrap()]);
    assert!(run_ok(&args).is_empty());
    let (header, rows) = parse_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(header, EIGEN_HEADER);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][1], "1");
    assert_eq!(rows[0][6], "2");
    let l: f64 = rows[0][2].parse().unwrap();
    assert!(l > 0.9 && l < 1.0, "{l}");
}

#[test]
fn every_command_has_its_header() {
    let solve = run_ok(&with_small(&["solve"]));
    assert_eq!(header_of(&solve), EIGEN_HEADER);
    let sweep = run_ok(&with_small(&["sweep", "0.3", "0.6"]));
    assert_eq!(header_of(&sweep), ASYMPTOTIC_HEADER);
    assert_eq!(parse_csv(&sweep).unwrap().1.len(), 6);
    let conv = run_ok(&with_small(&["convergence", "--levels", "2,4", "--degrees", "1,2"]));
    assert_eq!(header_of(&conv), CONVERGENCE_HEADER);
    assert_eq!(parse_csv(&conv).unwrap().1.len(), 4 * 3);
    let bounds = run_ok(&with_small(&["bounds", "0.3", "--cert-n", "8"]));
    assert_eq!(header_of(&bounds), BOUNDS_HEADER);
    let decay = run_ok(&["decay", "--theta", "pi/4", "--level", "2", "--degree", "4", "--nval", "2", "--nsub", "8"]);
    assert_eq!(header_of(&decay), DECAY_HEADER);
    let export = run_ok(&with_small(&["export", "--nx", "30", "--ny", "10"]));
    assert_eq!(header_of(&export), FIELD_HEADER);
}

#[test]
fn export_omits_points_outside() {
    let text = run_ok(&with_small(&["export", "--nx", "200", "--ny", "50"]));
    let (_, rows) = parse_csv(&text).unwrap();
    assert!(!rows.is_empty() && rows.len() < 200 * 50);
    assert!(rows.iter().all(|r| r.iter().all(|c| c.parse::<f64>().is_ok())));
}

#[test]
fn empty_sweep_is_an_empty_table() {
    let out = run(&with_small(&["sweep"]));
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "theta,j,two_term,bo_value,fem_value,gap\n");
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = with_small(&["solve", "--theta", "0.3*pi/2", "--seed", "7"]);
    assert_eq!(run_ok(&args), run_ok(&args));
    let sweep = with_small(&["sweep", "0.2", "0.4", "0.6"]);
    let serial = run_ok(&sweep);
    let threaded = Command::new(env!("CARGO_BIN_EXE_brokenguide")).args(&sweep).env("BROKENGUIDE_THREADS", "3").output().unwrap();
    assert_eq!(serial.as_bytes(), threaded.stdout.as_slice());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\ntheta = 0.4*pi/2\nlevel = 3\ndegree = 2\nlength = 2\nnval = 2\nnsub = 6\n").unwrap();
    let text = run_ok(&["solve", "--config", cfg.to_str().unwrap(), "--level", "2"]);
    let (_, rows) = parse_csv(&text).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][6], "2");
    let theta: f64 = rows[0][0].parse().unwrap();
    assert!((theta - 0.4 * std::f64::consts::FRAC_PI_2).abs() < 1e-14);
}

#[test]
fn failures_exit_nonzero_with_diagnostics() {
    let out = run(&["solve", "--theta", "pi/2"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("config:"));
    let out = run(&with_small(&["solve", "--set", "max_iterations=1"]));
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("solve:"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "levle = 3\n").unwrap();
    let out = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key 'levle'"));
}

#[test]
fn mesh_and_vtk_exports() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = run_ok(&["mesh", "--level", "2", "--length", "1"]);
    let counts: Vec<usize> = mesh.lines().next().unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert_eq!(counts.len(), 3);
    assert_eq!(mesh.lines().count(), counts.iter().sum::<usize>() + 1);
    let vtk = dir.path().join("mode.vtk");
    let field = dir.path().join("field.csv");
    let mut args = with_small(&["solve"]);
    args.extend(["--vtk", vtk.to_str().unwrap(), "--field", field.to_str().unwrap()]);
    run_ok(&args);
    assert!(std::fs::read_to_string(Path::new(&vtk)).unwrap().starts_with("# vtk DataFile"));
    assert_eq!(header_of(&std::fs::read_to_string(field).unwrap()), FIELD_HEADER);
}
