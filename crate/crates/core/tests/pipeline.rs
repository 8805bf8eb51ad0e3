//! End-to-end behaviour: stage stability, complex evaluation, and the
//! command-line binary.

use std::path::Path;
use std::process::Command;

use num_complex::Complex64;
use whitney::taylor::parse;
use whitney::whitney::verify::grid;
use whitney::whitney::{build_approximant, Approximant, Case, Mode, ProblemSpec};

fn desk(mode: Mode, rho: &str, stages: usize) -> Approximant {
    let p = |s: &str| parse(s).unwrap();
    let spec = ProblemSpec::new(p("sin(t)"), p("1/(2*(1+t))"), p(rho), None, Case::R, std::f64::consts::SQRT_2);
    build_approximant(&spec, stages, mode).unwrap()
}

#[test]
fn extra_stage_moves_protected_values_by_a_quarter_budget() {
    for n in 3..=4 {
        let small = desk(Mode::Practical, "1", n);
        let big = desk(Mode::Practical, "1", n + 1);
        let (lo, hi) = small.protected_region().unwrap();
        let budget = small.scheme.eps[n - 1] / 4.0;
        for t in grid(lo, hi, 101) {
            let a = small.eval_jet(t, 1).unwrap();
            let b = big.eval_jet(t, 1).unwrap();
            for k in 0..=1 {
                assert!((a[k] - b[k]).abs() <= budget, "N = {n}, t = {t}, k = {k}");
            }
        }
    }
}

#[test]
fn complex_evaluation_bounds_the_real_slice() {
    let ap = desk(Mode::Certified, "0", 3);
    let (lo, hi) = ap.protected_region().unwrap();
    for t in grid(lo, hi, 11) {
        let e = ap.eval_complex(Complex64::new(t, 0.0)).unwrap();
        assert!(e.covered);
        let g = ap.eval_jet(t, 0).unwrap()[0];
        assert!(g.abs().ln() <= e.total_ln + 1e-12, "t = {t}");
        let built = e.built.value.expect("real axis keeps the phase");
        assert!((built.re - g).abs() <= 1e-9 && built.im.abs() <= 1e-9);
    }
    // Farther out the bound only grows along the imaginary axis.
    let a = ap.eval_complex(Complex64::new(0.0, 1.0)).unwrap().total_ln;
    let b = ap.eval_complex(Complex64::new(0.0, 2.0)).unwrap().total_ln;
    assert!(b >= a);
}

fn whitney(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_whitney")).args(args).current_dir(dir).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn desk_config_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("desk.json"), r#"{"f": "sin(t)", "eps": "1/(2*(1+t))", "rho": "0", "stages": 3, "mode": "certified", "approximant": "ap.json"}"#).unwrap();
    let (code, _, err) = whitney(&["approximate", "--config", "desk.json", "--out", "ap.json"], d);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("protected region"));

    let (code, csv, err) = whitney(&["verify", "--config", "desk.json"], d);
    assert_eq!(code, 0, "{err}");
    assert!(csv.starts_with("t,k,deviation,eps,pass\n"));

    let (code, csv, err) = whitney(&["bound", "--config", "desk.json"], d);
    assert_eq!(code, 0, "{err}");
    assert!(csv.starts_with("point,measured_log,bound_log,margin\n"));
    assert_eq!(csv.lines().count(), 5);

    std::fs::write(d.join("thm3.json"), r#"{"approximant": "ap.json", "bound": {"envelope": "thm3"}}"#).unwrap();
    let (code, _, err) = whitney(&["bound", "--config", "thm3.json"], d);
    assert_eq!(code, 3, "{err}");

    let (code, _, _) = whitney(&["verify", "--config", "desk.json", "--points", "5"], d);
    assert_eq!(code, 0);
    std::fs::write(d.join("far.json"), r#"{"approximant": "ap.json", "grid": {"points": 5, "lo": -3.0, "hi": 3.0}}"#).unwrap();
    let (code, _, err) = whitney(&["verify", "--config", "far.json"], d);
    assert_eq!(code, 3);
    assert!(err.contains("protected region"), "{err}");
}

#[test]
fn identical_config_and_seed_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("t.json"), r#"{"f": "1/(1+t)", "eps": "1/(2*(1+t))", "rho": "1", "stages": 4, "transform": {"kind": "halfline", "roundtrip_points": 64}}"#).unwrap();
    let a = whitney(&["transform", "--config", "t.json", "--seed", "7"], d);
    let b = whitney(&["transform", "--config", "t.json", "--seed", "7"], d);
    assert_eq!(a.0, 0, "{}", a.2);
    assert_eq!(a, b);
    for cmd in ["bump-audit", "weierstrass-audit"] {
        let x = whitney(&[cmd], d);
        assert_eq!(x.0, 0, "{cmd}: {}", x.2);
        assert_eq!(x, whitney(&[cmd], d));
    }
    let p = whitney(&["verify", "--f", "sin(t)", "--eps", "1/(2*(1+t))", "--rho", "1", "--stages", "3", "--points", "41"], d);
    assert_eq!(p.0, 0, "{}", p.2);
    assert_eq!(p, whitney(&["verify", "--f", "sin(t)", "--eps", "1/(2*(1+t))", "--rho", "1", "--stages", "3", "--points", "41"], d));
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(whitney(&["approximate", "--f", "sin(t)"], dir.path()).0, 2);
    assert_eq!(whitney(&["approximate", "--config", "missing.json", "--f", "0", "--eps", "1"], dir.path()).0, 2);
    assert_eq!(whitney(&["approximate", "--f", "0", "--eps", "1", "--case", "C"], dir.path()).0, 2);
}
