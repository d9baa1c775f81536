use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lp_sobolev::harness::generate::probe_directions;
use lp_sobolev::io::{load_polytope, save_function, save_measure, save_polytope};
use lp_sobolev::pwa::cone_function;
use lp_sobolev::{lp_surface_measure, Polytope};

fn sobolev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sobolev")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_kind(out: &Output) -> String {
    let line = String::from_utf8_lossy(&out.stderr).lines().last().unwrap_or_default().to_string();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    v["kind"].as_str().unwrap().to_string()
}

fn shipped_suite() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../suites/default.json")
}

#[test]
fn help_lists_schemas_and_exit_codes() {
    let out = sobolev(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["polytope", "measure", "function", "radial", "suite", "Exit codes"] {
        assert!(text.contains(needle), "missing {needle}");
    }
}

#[test]
fn sobolev_body_of_a_cone_is_its_base() {
    let dir = tempfile::tempdir().unwrap();
    let square = Polytope::cube(2, 1.0).unwrap();
    let f = dir.path().join("cone.json");
    let k = dir.path().join("k.json");
    save_function(&f, &cone_function(&square)).unwrap();
    let out = sobolev(&["sobolev-body", "--fn", path(&f), "--p", "1.5", "--out", path(&k)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body = load_polytope(&k).unwrap();
    assert!(body.support_distance(&square, &probe_directions(2, 64)) < 1e-6);
}

#[test]
fn minkowski_solution_recovers_the_cube() {
    let dir = tempfile::tempdir().unwrap();
    let cube = Polytope::cube(3, 0.7).unwrap();
    let mu = dir.path().join("mu.json");
    let k = dir.path().join("k.json");
    let trace = dir.path().join("trace.csv");
    save_measure(&mu, &lp_surface_measure(&cube, 1.5)).unwrap();
    let out = sobolev(&[
        "solve-minkowski", "--measure", path(&mu), "--p", "1.5", "--out", path(&k), "--trace", path(&trace),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(load_polytope(&k).unwrap().support_distance(&cube, &probe_directions(3, 64)) < 1e-6);
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("iter,"));
}

#[test]
fn missing_input_exits_2() {
    let out = sobolev(&["affine-energy", "--fn", "/nonexistent/f.json", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "input");
}

#[test]
fn unconverged_solver_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mu = dir.path().join("mu.json");
    let k = dir.path().join("k.json");
    std::fs::write(
        &mu,
        r#"{"dim": 2, "atoms": [{"u": [1, 0], "w": 1.0}, {"u": [0, 1], "w": 5.0},
            {"u": [-1, 0], "w": 2.0}, {"u": [0, -1], "w": 0.3}, {"u": [0.6, 0.8], "w": 0.1}]}"#,
    )
    .unwrap();
    let out = sobolev(&["solve-minkowski", "--measure", path(&mu), "--p", "3", "--out", path(&k), "--max-iters", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_kind(&out), "solver");
}

#[test]
fn check_prints_a_result() {
    let dir = tempfile::tempdir().unwrap();
    let k = dir.path().join("k.json");
    let l = dir.path().join("l.json");
    save_polytope(&k, &Polytope::cube(2, 1.0).unwrap()).unwrap();
    save_polytope(&l, &Polytope::regular_polygon(5, 1.3, 0.1).unwrap()).unwrap();
    let out = sobolev(&["check", "minkowski", "--k", path(&k), "--l", path(&l), "--p", "2.5"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["check"], "minkowski");
    assert_eq!(v["pass"], true);
    assert!(v["ratio"].as_f64().unwrap() >= 1.0);
}

#[test]
fn unknown_check_is_rejected() {
    let out = sobolev(&["check", "no-such-check", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn suite_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"corpora": [{"dim": 2, "count": 4, "seed": 7, "generator": "random-pwa",
            "checks": ["sobolev_body", "affine_sobolev", "polya_szego"]}]}"#,
    )
    .unwrap();
    let mut reports = Vec::new();
    for run in 0..2 {
        let out_json = dir.path().join(format!("r{run}.json"));
        let out_csv = dir.path().join(format!("r{run}.csv"));
        let out = sobolev(&["suite", "--spec", path(&spec), "--out", path(&out_json), "--csv", path(&out_csv)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        reports.push((std::fs::read(&out_json).unwrap(), std::fs::read_to_string(&out_csv).unwrap()));
    }
    assert_eq!(reports[0], reports[1]);
    assert!(reports[0].1.starts_with("check,digest,lhs,rhs,ratio,pass"));
    assert_eq!(reports[0].1.lines().count(), 1 + 12);

    let hist = sobolev(&["export-plot", "histogram", "--report", path(&dir.path().join("r0.json"))]);
    assert!(hist.status.success());
}

#[test]
fn shipped_suite_passes() {
    let out = sobolev(&["suite", "--spec", path(&shipped_suite())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn print_default_matches_shipped_suite() {
    let out = sobolev(&["suite", "--print-default"]);
    assert!(out.status.success());
    let shipped = std::fs::read_to_string(shipped_suite()).unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), shipped);
}
