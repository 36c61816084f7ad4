use std::path::Path;

use heatcut::cli::run;
use serde_json::Value;

fn heatcut(args: &[&str]) -> i32 {
    run(std::iter::once("heatcut").chain(args.iter().copied()))
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, String) {
    let out = dir.join(name);
    let out_s = out.to_str().unwrap().to_string();
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--output", &out_s]);
    let code = heatcut(&all);
    (code, std::fs::read_to_string(&out).unwrap_or_default())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn kernel_eval_wrapped_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(dir.path(), "k.json", &["kernel", "eval", "--model", "circle", "--x", "0", "--y", "0", "--t", "0.5"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((num(&v["kernel"]["value"]) - 0.564190).abs() < 1e-6);
    assert!(out.contains("5.6418958354775628e-01"));
}

#[test]
fn cut_map_marks_only_diagonals() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(dir.path(), "map.csv", &["cut", "map", "--model", "torus:2pi,2pi", "--x", "0,0", "--directions", "360"]);
    assert_eq!(code, 0);
    let rows: Vec<Vec<String>> = out.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 360);
    let r: Vec<usize> = rows.iter().enumerate().filter(|(_, r)| r[2] == "R").map(|(i, _)| i).collect();
    assert_eq!(r, vec![45, 135, 225, 315]);
    assert!(rows.iter().all(|r| r[2] == "R" || r[2] == "P"));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["energy", "sweep", "--model", "sphere:2", "--x", "north", "--theta", "1,0,0", "--d", "2", "--a", "0,1,0"];
    let (c1, a) = run_to(dir.path(), "a.csv", &args);
    let (c2, b) = run_to(dir.path(), "b.csv", &args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 6);
    let args = ["cut", "classify-pair", "--model", "torus:2pi,2pi", "--x", "0,0", "--y", "pi,0"];
    assert_eq!(run_to(dir.path(), "a.json", &args).1, run_to(dir.path(), "b.json", &args).1);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"model": {"model": "torus", "periods": [6.283185307179586, 6.283185307179586]},
            "x": [0, 0], "y": [3.141592653589793, 0], "t": 0.05, "a": [1, 0]}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let (code, out) = run_to(dir.path(), "h.json", &["--config", c, "repr", "check-hess"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!(num(&v["relative_residual"]) < 1e-3);
    let (code, out) = run_to(dir.path(), "g.json", &["--config", c, "repr", "check-grad", "--a", "0,1", "--y", "1,0"]);
    assert_eq!(code, 0);
    assert!(num(&json(&out)["lhs"]).abs() < 1e-8);
}

#[test]
fn config_validation_is_field_precise() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["cut", "classify-pair", "--model", "torus:2pi,2pi", "--x", "0,0", "--y", "pi,0"];
    let mut a = base.to_vec();
    a.extend(["--t-grid", "0.01,0.02,0.04,0.08"]);
    assert_eq!(heatcut(&a), 2);
    let mut a = base.to_vec();
    a.extend(["--nodes-per-axis", "5"]);
    assert_eq!(heatcut(&a), 2);
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"modle": "circle"}"#).unwrap();
    assert_eq!(heatcut(&["--config", cfg.to_str().unwrap(), "kernel", "eval"]), 2);
    assert_eq!(heatcut(&["kernel", "eval", "--model", "cone:1", "--x", "0", "--y", "0", "--t", "1"]), 2);
    assert_eq!(heatcut(&["kernel", "eval", "--model", "circle", "--x", "0", "--y", "0"]), 2);
}

#[test]
fn laplace_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(dir.path(), "d.json", &["laplace", "diagram", "--exponents", "2,2;6,0;0,6"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["remoteness"]["p"], "1/2");
    assert_eq!(v["remoteness"]["k_mult"], 1);
    let (code, out) = run_to(dir.path(), "e.json", &["laplace", "expand", "--k", "1,2", "--t", "1e-3", "--du-grad", "0,1"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((num(&v["lower_order_term"]["variance_coefficient"]) - 0.337989).abs() < 1e-6);
}

#[test]
fn rho_and_mu() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) =
        run_to(dir.path(), "rho.csv", &["cut", "rho", "--model", "torus:2pi,2pi", "--x", "0,0", "--directions", "4", "--a", "1,0"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "theta_1,theta_2,rho,psi,psi_tilde,phi,F");
    let rho: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((rho + std::f64::consts::PI.powi(2)).abs() < 1e-10);
    let (code, out) = run_to(dir.path(), "mu.json", &["mu", "show", "--model", "torus:2pi,2pi", "--x", "0,0", "--y", "pi,0", "--t", "0.01"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((num(&v["total"]) - 1.0).abs() < 1e-12);
    assert_eq!(v["cluster_weights"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_single_criterion_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run_to(dir.path(), "v.json", &["verify", "criterion", "7"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["failed"], 0);
    assert_eq!(v["criteria"][0]["id"], 7);
    assert_eq!(heatcut(&["verify", "criterion", "12"]), 2);
}
