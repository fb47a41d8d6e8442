use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lmsm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmsm")).args(args).current_dir(cwd).output().expect("run lmsm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sim = lmsm(&["simulate", "--hurst", "0.75", "--n", "4096", "--substeps", "4", "--seed", "9", "--out", "p.csv"], d);
    assert!(sim.status.success(), "{}", String::from_utf8_lossy(&sim.stderr));
    let text = fs::read_to_string(d.join("p.csv")).unwrap();
    assert!(text.starts_with("t,y\n0,0\n"));
    assert_eq!(text.lines().count(), 4098);
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("p.json")).unwrap()).unwrap();
    assert_eq!(side["seed"], 9);

    let local = lmsm(&["estimate", "--input", "p.csv", "--interval", "0:1", "--filter-order", "3"], d);
    assert!(local.status.success(), "{}", String::from_utf8_lossy(&local.stderr));
    let h: f64 = stdout(&local).trim().parse().unwrap();
    assert!((0.5..=1.0).contains(&h));
    assert!((h - 0.75).abs() < 0.1, "estimate {h}");

    let global = lmsm(&["estimate", "--input", "p.csv", "--theta", "0.25", "--relaxed", "--out", "h.csv"], d);
    assert!(global.status.success(), "{}", String::from_utf8_lossy(&global.stderr));
    let rows = fs::read_to_string(d.join("h.csv")).unwrap();
    assert!(rows.starts_with("t,h\n0,"));
    assert_eq!(rows.lines().count(), 6);
    assert!(d.join("h.json").exists());
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let hurst = r#"{"family":"sinusoidal","mean":0.8,"amplitude":0.05,"frequency":2}"#;
    for out in ["a.csv", "b.csv"] {
        let o = lmsm(&["simulate", "--hurst", hurst, "--n", "512", "--substeps", "4", "--seed", "3", "--out", out], d);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // H outside (1/alpha, 1)
    assert_eq!(lmsm(&["simulate", "--hurst", "0.6", "--n", "64", "--out", "x.csv"], d).status.code(), Some(2));
    assert_eq!(lmsm(&["simulate", "--hurst", "{bad", "--n", "64", "--out", "x.csv"], d).status.code(), Some(2));
    assert_eq!(lmsm(&["verify", "--suite", "nope"], d).status.code(), Some(2));
    assert_eq!(lmsm(&["frobnicate"], d).status.code(), Some(2));

    fs::write(d.join("cfg.json"), r#"{"kind":"local-interval","unknown":1}"#).unwrap();
    assert_eq!(lmsm(&["experiment", "--config", "cfg.json"], d).status.code(), Some(2));

    // a missing input is a runtime failure
    assert_eq!(lmsm(&["estimate", "--input", "missing.csv", "--theta", "0.5"], d).status.code(), Some(3));
    // too short for the strict interval condition
    fs::write(d.join("short.csv"), "t,y\n0,0\n0.25,1\n0.5,0\n0.75,1\n1,0\n").unwrap();
    assert_eq!(lmsm(&["estimate", "--input", "short.csv", "--interval", "0:1"], d).status.code(), Some(3));
}

#[test]
fn verify_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = lmsm(&["verify", "--suite", "algebra"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().count() >= 5);
    assert!(out.lines().all(|l| l.starts_with("PASS algebra/")));
}

#[test]
fn experiment_outputs_match_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = serde_json::json!({
        "kind": "global-uniform",
        "model": { "alpha": 1.5, "hurst": { "family": "piecewise-linear", "knots_t": [0.0, 0.5, 1.0], "knots_h": [0.75, 0.9, 0.8] } },
        "sim": { "substeps": 4 },
        "estimator": { "beta": 0.2, "filter_order": 2, "regime": "relaxed" },
        "ns": [256, 512],
        "replicates": 3,
        "master_seed": 12,
        "outputs": "out",
        "theta": 0.25
    });
    fs::write(d.join("cfg.json"), config.to_string()).unwrap();
    for (jobs, out) in [("1", "one"), ("3", "three")] {
        let o = lmsm(&["experiment", "--config", "cfg.json", "--jobs", jobs, "--outputs", out], d);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("N=512"));
    }
    for file in ["global-uniform.csv", "rates.csv"] {
        assert_eq!(fs::read(d.join("one").join(file)).unwrap(), fs::read(d.join("three").join(file)).unwrap());
    }
    let rows = fs::read_to_string(d.join("one/global-uniform.csv")).unwrap();
    assert_eq!(rows.lines().next().unwrap(), "N,replicate,seed,error,theta,windows,status");
    assert_eq!(rows.lines().count(), 7);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("one/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}
