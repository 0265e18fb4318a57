use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nlqw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlqw")).args(args).env("NLQW_THREADS", "2").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

const QUINTIC: &str = r#"coin={"family":"quintic_exponential","a1":[[0,0],[0.3,0],[0.3,0],[0,0]],"a2":[[0.2,0],[0,0],[0,0],[-0.2,0]]}"#;

const RECORDER: &str = r#"recorder={"sup_norm":true,"lp_norms":[2,4],"argmax":true,"thresholds":[{"component":1,"gamma":0.05}],"snapshot_times":[50]}"#;

#[test]
fn simulate_writes_series_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let o = nlqw(&["simulate", "--out", out.to_str().unwrap(), "--set", "steps=100", "--set", "coin.g=-0.4", "--set", RECORDER]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["sup_norm.csv", "l2_norm.csv", "l4_norm.csv", "argmax.csv", "threshold_u1_0.05.csv", "snapshot_t50.csv", "final_state.csv", "plot.gp"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let sup = fs::read_to_string(out.join("sup_norm.csv")).unwrap();
    assert_eq!(sup.lines().count(), 102);
    let s = summary(&out);
    assert_eq!(s["pass"], Value::Bool(true));
    assert!((s["results"]["final_l2_norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_nlqw"))
            .args(["simulate", "--out", out.to_str().unwrap(), "--set", "steps=300", "--set", "coin.g=0.7", "--set", RECORDER])
            .env("NLQW_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        out
    };
    let a = run("a", "1");
    let b = run("b", "4");
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 8);
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn invalid_configs_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let out = out.to_str().unwrap();
    assert_eq!(code(&nlqw(&["simulate", "--out", out, "--set", "colour=3"])), 2);
    assert_eq!(code(&nlqw(&["simulate", "--out", out, "--set", "schema_version=7"])), 2);
    assert_eq!(code(&nlqw(&["simulate", "--out", out, "--set", "coin.family=unknown"])), 2);
    assert_eq!(code(&nlqw(&["simulate", "--out", out, "--set", r#"initial={"delta":{"component":3,"site":0}}"#])), 2);
    assert_eq!(code(&nlqw(&["weak-limit", "--out", out, "--set", "coin.g=0.5"])), 2);
    assert_eq!(code(&nlqw(&["recover", "--out", out, "--set", "coin.g=0.5"])), 2);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"steps": 10, "decay": {"window": 4}}"#).unwrap();
    let o = nlqw(&["decay", "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("window"));
    let o = Command::new(env!("CARGO_BIN_EXE_nlqw")).args(["schema"]).env("NLQW_THREADS", "0").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn set_overrides_file_and_out_overrides_both() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let from_file = dir.path().join("from_file");
    let from_flag = dir.path().join("from_flag");
    let v = serde_json::json!({
        "schema_version": 1,
        "steps": 20,
        "coin": {"family": "galton", "g": 0.3},
        "out": from_file.to_str().unwrap(),
    });
    fs::write(&cfg, v.to_string()).unwrap();
    let o = nlqw(&["simulate", "--config", cfg.to_str().unwrap(), "--set", "steps=30", "--set", "out=ignored", "--out", from_flag.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!from_file.exists());
    let s = summary(&from_flag);
    assert_eq!(s["results"]["steps"], serde_json::json!(30));
    assert_eq!(s["results"]["family"], serde_json::json!("galton"));
}

#[test]
fn decay_and_weak_limit_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = nlqw(&["decay", "--out", out.to_str().unwrap(), "--set", "steps=2000", "--set", "decay.t_min=200", "--set", "decay.t_max=2000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let header = fs::read_to_string(out.join("decay.csv")).unwrap();
    assert!(header.starts_with("t,sup_norm,log10_t,log10_sup_norm\n"));
    assert!(out.join("fit.json").exists());

    let o = nlqw(&["decay", "--out", out.to_str().unwrap(), "--set", "steps=2000", "--set", "decay.t_min=200", "--set", "decay.t_max=2000", "--set", "decay.expected_slope=-0.5"]);
    assert_eq!(code(&o), 1);
    assert_eq!(summary(&out)["pass"], Value::Bool(false));

    let out = dir.path().join("w");
    let o = nlqw(&["weak-limit", "--out", out.to_str().unwrap(), "--set", "weak_limit.t=1500"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let cdf = fs::read_to_string(out.join("cdf.csv")).unwrap();
    assert!(cdf.starts_with("v,empirical,limit\n"));
    assert_eq!(cdf.lines().count(), 2002);
}

#[test]
fn scatter_reports_convergence_in_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = nlqw(&["scatter", "--out", out.to_str().unwrap(), "--set", QUINTIC, "--set", "initial.delta.amplitude=0.1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let s = summary(&out);
    assert_eq!(s["results"]["converged"], Value::Bool(true));
    assert!(out.join("scattering.csv").exists() && out.join("u_plus.csv").exists());

    let o = nlqw(&["scatter", "--out", out.to_str().unwrap(), "--set", QUINTIC, "--set", "initial.delta.amplitude=0.1", "--set", "scatter.horizon=40"]);
    assert_eq!(code(&o), 1);
    assert_eq!(summary(&out)["results"]["converged"], Value::Bool(false));
}

#[test]
fn recover_fits_cubic_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = nlqw(&["recover", "--out", out.to_str().unwrap(), "--set", QUINTIC]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r: Value = serde_json::from_str(&fs::read_to_string(out.join("recovery.json")).unwrap()).unwrap();
    let order = r["fitted_order"].as_f64().unwrap();
    assert!(order > 2.5, "{order}");
    assert_eq!(r["points"].as_array().unwrap().len(), 3);
}

#[test]
fn schema_subcommand_prints_valid_json() {
    let o = nlqw(&["schema"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["additionalProperties"], Value::Bool(false));
}
