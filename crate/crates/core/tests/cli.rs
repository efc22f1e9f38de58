//! The `retrial` binary end to end: golden pmfs, file outputs, exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn retrial(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_retrial")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Numeric rows of a CSV written by the binary (manifest, header and
/// trailing comments skipped).
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn column(text: &str, i: usize) -> Vec<f64> {
    rows(text).iter().map(|r| r[i]).collect()
}

const MM1: [&str; 4] = ["--family", "exponential:nu=1", "--lambda", "0.5"];

#[test]
fn asym_canonical_row() {
    let o = retrial(&["asym", "--j", "100"]);
    assert!(o.status.success());
    let r = &rows(&stdout(&o))[0];
    assert_eq!(r[0], 100.0);
    assert!((r[1] - 1e-4).abs() < 1e-16);
    assert!((r[2] - 1.0267e-4).abs() < 1e-8);
    assert!((r[3] - 2.667e-6).abs() < 1e-9);
}

#[test]
fn asym_accepts_infinite_retrial_rate() {
    let o = retrial(&["asym", "--mu", "inf", "--jmax", "10000"]);
    assert!(o.status.success());
    let first = column(&stdout(&o), 1);
    assert!(first.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn pmf_geometric_golden() {
    let mut args = vec!["pmf", "--mu", "inf", "--law", "l_infinity", "--order", "64", "--jmax", "30"];
    args.extend(MM1);
    let pmf = column(&stdout(&retrial(&args)), 1);
    for (n, p) in pmf.iter().enumerate() {
        assert!((p - 0.5f64.powi(n as i32 + 1)).abs() < 1e-12, "n={n}");
    }
}

#[test]
fn pmf_negative_binomial_golden() {
    // μ = 0.25: R_μ ~ NegBin(2, 1/2), P{n} = (n+1) 2^{-n-2}
    let mut args = vec!["pmf", "--mu", "0.25", "--law", "r_mu", "--order", "64", "--jmax", "30"];
    args.extend(MM1);
    let pmf = column(&stdout(&retrial(&args)), 1);
    for (n, p) in pmf.iter().enumerate() {
        assert!((p - (n as f64 + 1.0) * 0.5f64.powi(n as i32 + 2)).abs() < 1e-12, "n={n}");
    }
}

#[test]
fn pmf_decomposition_golden() {
    let law = |l: &str| column(&stdout(&retrial(&["pmf", "--law", l, "--order", "128", "--jmax", "127"])), 1);
    let (l_inf, r, l) = (law("l_infinity"), law("r_mu"), law("l_mu"));
    for n in 0..l.len() {
        let conv: f64 = (0..=n).map(|k| l_inf[k] * r[n - k]).sum();
        assert!((conv - l[n]).abs() < 1e-12, "n={n}");
    }
}

#[test]
fn manifest_reproduces_output_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    let f = first.to_str().unwrap();
    assert!(retrial(&["compare", "--j", "50,200", "--order", "400", "--out", f]).status.success());
    let o = retrial(&["compare", "--config", f, "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (a, b) = (std::fs::read_to_string(&first).unwrap(), std::fs::read_to_string(&second).unwrap());
    // the manifests differ only in the output path
    assert_eq!(a.lines().skip(1).collect::<Vec<_>>(), b.lines().skip(1).collect::<Vec<_>>());
    assert!(a.starts_with("# manifest: {"));
}

#[test]
fn key_value_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("model.cfg");
    std::fs::write(&cfg, "# Hall-Weiss example\nfamily=hall_weiss v=3 w=-1\nlambda=0.3 mu=2\nj=1000\n").unwrap();
    let o = retrial(&["asym", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(rows(&stdout(&o)).len(), 1);
}

#[test]
fn compare_reports_refinement_and_crossover() {
    let o = retrial(&["compare", "--j", "500,1000,2000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("j,exact_tail,e1_rel,e2_rel"));
    for r in rows(&text) {
        assert!(r[3] < r[2], "{r:?}");
        assert!(r[4] < r[3], "{r:?}");
    }
    assert_eq!(text.lines().last(), Some("# crossover: 500"));
}

#[test]
fn simulate_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let o = retrial(&["simulate", "--horizon", "200000", "--seed", "5", "--jmax", "30", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().nth(1), Some("state,pmf,half_width"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(&out).with_extension("json")).unwrap()).unwrap();
    assert_eq!(manifest["run"]["config"]["seed"], 5);
    let idle = manifest["idle_probability"]["value"].as_f64().unwrap();
    assert!((idle - 0.5).abs() < 0.02);

    let again = dir.path().join("again.csv");
    retrial(&["simulate", "--horizon", "200000", "--seed", "5", "--jmax", "30", "--out", again.to_str().unwrap()]);
    let a: Vec<String> = csv.lines().skip(1).map(String::from).collect();
    let b: Vec<String> = std::fs::read_to_string(&again).unwrap().lines().skip(1).map(String::from).collect();
    assert_eq!(a, b);
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["asym", "--lambda", "1.5"],
        vec!["pmf", "--family", "burr:b=2,v=3"],
        vec!["pmf", "--family", "weibull:k=1"],
        vec!["asym", "--mu", "fast"],
        vec!["compare", "--order", "100", "--j", "500"],
        vec!["simulate", "--mu", "inf"],
        vec!["launch"],
    ] {
        let o = retrial(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let o = retrial(&["asym", "--lambda", "1.5"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda * beta1 < 1"));
}

#[test]
fn validate_reports_every_criterion() {
    let o = retrial(&["validate"]);
    let text = stdout(&o);
    let verdicts: Vec<&str> = text.lines().filter(|l| l.starts_with('[')).collect();
    assert_eq!(verdicts.len(), 9);
    let all_pass = verdicts.iter().all(|l| l.starts_with("[PASS]"));
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 4 }));
}
