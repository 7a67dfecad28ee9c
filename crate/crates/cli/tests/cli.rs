use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ipiag::RateCertificate;
use serde_json::Value;

const TOY: &str = r#"{"generator": {"name": "toy", "params": {"n": 100}}}"#;
const SMALL_TOY: &str = r#"{"generator": {"name": "toy", "params": {"n": 20}}}"#;
const SMALL_LASSO: &str =
    r#"{"generator": {"name": "lasso", "params": {"rows": 8, "cols": 12, "sparsity": 0.25, "lambda": 0.1}, "seed": 5}}"#;

fn ipiag() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ipiag"));
    cmd.env_remove("IPIAG_FLOAT_PRECISION");
    cmd
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run_toy(dir: &Path, out: &str, extra: &[&str]) -> Output {
    let problem = write(dir, "toy.json", TOY);
    ipiag()
        .args(["run", "--problem"])
        .arg(&problem)
        .arg("--out")
        .arg(dir.join(out))
        .args(extra)
        .output()
        .unwrap()
}

fn summary(dir: &Path, out: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(out).join("summary.json")).unwrap()).unwrap()
}

fn certify(args: &[&str]) -> (Output, Option<RateCertificate>) {
    let out = ipiag().arg("certify").args(args).output().unwrap();
    let cert = serde_json::from_slice(&out.stdout).ok();
    (out, cert)
}

#[test]
fn auto_run_on_toy_stays_inside_certified_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_toy(dir.path(), "r", &["--variant", "ipiag", "--iters", "2000", "--seed", "3", "--plot"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path(), "r");
    assert_eq!(s["bound_check"]["status"], "passed");
    assert_eq!(s["bound_check"]["checked"], 2000);
    assert!(s["certificate"]["C"].as_f64().unwrap() > 0.0);
    let svg = std::fs::read_to_string(dir.path().join("r/plot.svg")).unwrap();
    assert!(svg.contains("stroke-dasharray"));
}

#[test]
fn zero_iterations_write_the_initial_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_toy(dir.path(), "r", &["--variant", "piag", "--iters", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("r/trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,"));
    assert_eq!(summary(dir.path(), "r")["iterations"], 0);
}

#[test]
fn summary_fields_reparse() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_toy(dir.path(), "r", &["--variant", "piag-m", "--iters", "300", "--schedule", "sync"]);
    assert!(out.status.success());
    let s = summary(dir.path(), "r");
    let cert: RateCertificate = serde_json::from_value(s["certificate"].clone()).unwrap();
    assert_eq!(cert.alpha, s["alpha"].as_f64().unwrap());
    assert_eq!(cert.eta1, s["eta1"].as_f64().unwrap());
    assert!(cert.constant.is_some());
    assert!(s["final_gap"].as_f64().unwrap() >= 0.0);
    assert!(s["iters_to_1e_6"].is_null());
    assert_eq!(s["schedule"]["kind"], "sync");
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--variant", "ipiag", "--iters", "500", "--seed", "9", "--alpha", "1e-3"];
    assert!(run_toy(dir.path(), "a", &args).status.success());
    assert!(run_toy(dir.path(), "b", &args).status.success());
    let read = |d: &str| std::fs::read(dir.path().join(d).join("trace.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
}

#[test]
fn inertia_helps_at_a_shared_step() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--iters", "5000", "--seed", "1", "--alpha", "1e-4"];
    let dist = |variant: &str| {
        let out = run_toy(dir.path(), variant, &[&["--variant", variant][..], &common].concat());
        assert!(out.status.success());
        summary(dir.path(), variant)["final_dist2"].as_f64().unwrap()
    };
    assert!(dist("ipiag") < dist("piag"));
}

#[test]
fn precision_variable_controls_csv_digits() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write(dir.path(), "toy.json", TOY);
    let status = ipiag()
        .env("IPIAG_FLOAT_PRECISION", "5")
        .args(["run", "--variant", "piag", "--iters", "1", "--problem"])
        .arg(&problem)
        .arg("--out")
        .arg(dir.path().join("r"))
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.path().join("r/trace.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("0,1.3455e3,"), "{csv}");

    let bad = ipiag()
        .env("IPIAG_FLOAT_PRECISION", "0")
        .args(["run", "--variant", "piag", "--iters", "1", "--problem"])
        .arg(&problem)
        .arg("--out")
        .arg(dir.path().join("s"))
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn auto_parameters_need_a_growth_constant() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write(dir.path(), "lasso.json", SMALL_LASSO);
    let out = ipiag()
        .args(["run", "--variant", "piag", "--iters", "10", "--problem"])
        .arg(&problem)
        .arg("--out")
        .arg(dir.path().join("r"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn oversized_step_exits_with_divergence_code() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write(dir.path(), "lasso.json", SMALL_LASSO);
    let out = ipiag()
        .args(["run", "--variant", "piag", "--alpha", "1", "--schedule", "sync", "--iters", "2000", "--problem"])
        .arg(&problem)
        .arg("--out")
        .arg(dir.path().join("r"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn foreign_inertia_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_toy(dir.path(), "r", &["--variant", "piag", "--eta1", "0.1", "--iters", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

fn compare_spec(problem: &str, runs: &[(&str, &str)]) -> String {
    let runs: Vec<String> = runs
        .iter()
        .map(|(label, variant)| {
            format!(
                r#"{{"label": "{label}", "variant": "{variant}", "alpha": 1e-3,
                    "schedule": {{"kind": "uniform1", "workers": 4, "tau": 3, "seed": 11}}, "iters": 3000}}"#
            )
        })
        .collect();
    format!(r#"{{"problem": {problem}, "repetitions": 3, "runs": [{}]}}"#, runs.join(","))
}

#[test]
fn duplicated_configurations_give_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "cmp.json", &compare_spec(SMALL_TOY, &[("x", "ipiag"), ("x", "ipiag"), ("p", "piag")]));
    let out = ipiag().arg("compare").arg(&spec).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "label,variant,alpha,eta1,eta2,rho,iters_to_1e-4,iters_to_1e-6,final_gap,repetitions,status");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1], lines[2]);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[9], "3");
    assert_eq!(fields[10], "ok");
    assert!(!fields[7].is_empty());

    let file = dir.path().join("table.csv");
    let status = ipiag().arg("compare").arg(&spec).args(["--repetitions", "1", "--out"]).arg(&file).status().unwrap();
    assert!(status.success());
    let written = std::fs::read_to_string(&file).unwrap();
    assert!(written.lines().nth(1).unwrap().contains(",1,ok"));
}

#[test]
fn mismatched_problems_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        r#"{{"runs": [
            {{"variant": "piag", "alpha": 1e-3, "problem": {SMALL_TOY},
              "schedule": {{"kind": "sync", "workers": 2}}, "iters": 10}},
            {{"variant": "ipiag", "alpha": 1e-3, "problem": {TOY},
              "schedule": {{"kind": "sync", "workers": 2}}, "iters": 10}}]}}"#
    );
    let spec = write(dir.path(), "cmp.json", &text);
    let out = ipiag().arg("compare").arg(&spec).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different problem"));
}

#[test]
fn certify_plain_rate_without_inertia() {
    let (out, cert) = certify(&["--L", "101", "--beta", "2", "--tau", "4", "--c1", "0", "--variant", "t1"]);
    assert!(out.status.success());
    let cert = cert.unwrap();
    assert_eq!(cert.eta1, 0.0);
    assert!(cert.admissible);
    assert_eq!(cert.eta2, cert.eta2_max);
    assert!((cert.rho - (1.0 + cert.eta2) / (1.0 + cert.alpha * 2.0)).abs() <= 1e-15);
    assert!(cert.constant.is_none());
}

#[test]
fn certify_heavy_ball_and_extrapolation_variants() {
    let (_, cor1) = certify(&["--L", "101", "--beta", "2", "--tau", "4", "--c1", "0.6", "--variant", "cor1"]);
    let cor1 = cor1.unwrap();
    let factor = cor1.simplified_factor.unwrap();
    assert!(factor < 1.0 && cor1.rho <= factor);
    assert_eq!(cor1.eta2, 0.0);

    let (_, cor2) = certify(&["--L", "101", "--beta", "2", "--tau", "4", "--variant", "cor2"]);
    let cor2 = cor2.unwrap();
    assert_eq!(cor2.eta1, 0.0);
    // At its own step bound the extrapolation room closes exactly.
    assert_eq!(cor2.eta2, 0.0);
    assert!(cor2.admissible && cor2.alpha > cor2.alpha0_stated);
    assert!((cor2.rho - 1.0 / (1.0 + cor2.alpha * 2.0)).abs() <= 1e-15);

    let (_, tight) = certify(&["--L", "101", "--beta", "2", "--tau", "4", "--c1", "0.25", "--variant", "t1tight"]);
    let tight = tight.unwrap();
    assert!(tight.alpha > tight.alpha0_stated);
}

#[test]
fn certify_rejects_out_of_range_constants() {
    for args in [
        &["--L", "101", "--beta", "2", "--tau", "4", "--c1", "0.5"][..],
        &["--L", "101", "--beta", "2", "--tau", "4", "--c1", "1", "--variant", "cor1"],
        &["--L", "101", "--beta", "-1", "--tau", "4"],
    ] {
        let (out, _) = certify(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}
