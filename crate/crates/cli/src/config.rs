//! Experiment configuration: JSON file, `--set` overrides, strict deserialization.

use std::f64::consts::FRAC_PI_4;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nlqw_core::evolution::Recorder;
use nlqw_core::scattering::{IndexConvention, ProbeOptions};
use nlqw_core::{CoinSpec, LatticeState};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;
pub const SCHEMA: &str = include_str!("../../../schema/experiment-config.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub coin: CoinSpec,
    pub initial: InitialState,
    pub steps: usize,
    pub recorder: Recorder,
    pub out: PathBuf,
    /// Write a gnuplot script next to the CSVs.
    pub plot: bool,
    pub decay: DecayConfig,
    pub weak_limit: WeakLimitConfig,
    pub scatter: ScatterConfig,
    pub recover: RecoverConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            coin: CoinSpec::RotationPower { theta0: FRAC_PI_4, g: 0.0, p: 1 },
            initial: InitialState::default(),
            steps: 10_000,
            recorder: Recorder::sup_norm(),
            out: PathBuf::from("out"),
            plot: true,
            decay: DecayConfig::default(),
            weak_limit: WeakLimitConfig::default(),
            scatter: ScatterConfig::default(),
            recover: RecoverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// `amplitude * delta_{component, site}`.
    Delta {
        component: usize,
        site: i64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// A state in the `x,re_u1,im_u1,re_u2,im_u2` format.
    Csv(PathBuf),
}

fn one() -> f64 {
    1.0
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Delta { component: 1, site: 0, amplitude: 1.0 }
    }
}

impl InitialState {
    pub fn build(&self) -> Result<LatticeState> {
        match self {
            InitialState::Delta { component, site, amplitude } => {
                Ok(LatticeState::delta(*component, *site)?.scaled((*amplitude).into()))
            }
            InitialState::Csv(path) => {
                let f = File::open(path).with_context(|| format!("opening initial state {}", path.display()))?;
                Ok(LatticeState::read_csv(BufReader::new(f))?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub expected_slope: Option<f64>,
    pub slope_tol: f64,
    /// Compared with the intercept of the fit at slope `-1/3`.
    pub expected_intercept: Option<f64>,
    pub intercept_tol: f64,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            t_min: 1000.0,
            t_max: 10_000.0,
            expected_slope: Some(-1.0 / 3.0),
            slope_tol: 0.05,
            expected_intercept: None,
            intercept_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeakLimitConfig {
    pub t: usize,
    pub grid_points: usize,
    pub max_kolmogorov: f64,
    pub mass_tol: f64,
}

impl Default for WeakLimitConfig {
    fn default() -> Self {
        WeakLimitConfig { t: 5000, grid_points: 2001, max_kolmogorov: 0.02, mass_tol: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterConfig {
    pub horizon: usize,
    /// Convergence tolerance relative to `||u0||_{l^2}`.
    pub rel_tol: f64,
    pub convention: IndexConvention,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        ScatterConfig { horizon: 2000, rel_tol: 1e-6, convention: IndexConvention::Statement }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverConfig {
    pub lambdas: Vec<f64>,
    pub probe: ProbeOptions,
    pub min_order: f64,
    pub ratio_range: [f64; 2],
}

impl Default for RecoverConfig {
    fn default() -> Self {
        RecoverConfig {
            lambdas: vec![0.2, 0.1, 0.05],
            probe: ProbeOptions::default(),
            min_order: 2.5,
            ratio_range: [4.0, 64.0],
        }
    }
}

/// Sets `path` (dot separated) in `root` to `raw`, read as JSON when it parses and as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let Some((path, raw)) = assignment.split_once('=') else {
        bail!("override `{assignment}` is not of the form key=value");
    };
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        bail!("override key `{path}` has an empty component");
    }
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        let obj = node.as_object_mut().with_context(|| format!("`{path}`: `{key}` is not inside an object"))?;
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = node.as_object_mut().with_context(|| format!("`{path}` does not name an object field"))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

/// Defaults, then the file, then `--set` overrides, then `--out`.
pub fn load(file: Option<&Path>, sets: &[String], out: Option<&Path>) -> Result<ExperimentConfig> {
    let base: ExperimentConfig = match file {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening config {}", p.display()))?;
            serde_json::from_reader(BufReader::new(f)).with_context(|| format!("invalid config {}", p.display()))?
        }
        None => ExperimentConfig::default(),
    };
    // Overrides act on the resolved config, so `coin.g=...` keeps the other coin fields.
    let mut root = serde_json::to_value(base)?;
    for s in sets {
        apply_override(&mut root, s)?;
    }
    if let Some(o) = out {
        apply_override(&mut root, &format!("out={}", Value::String(o.display().to_string())))?;
    }
    let cfg: ExperimentConfig = serde_json::from_value(root).context("invalid config")?;
    if cfg.schema_version != SCHEMA_VERSION {
        bail!("unsupported schema_version {} (expected {SCHEMA_VERSION})", cfg.schema_version);
    }
    cfg.recorder.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_nest_and_parse_json() {
        let mut v = serde_json::json!({"coin": {"family": "galton", "g": 1.0}});
        apply_override(&mut v, "coin.g=-0.5").unwrap();
        apply_override(&mut v, "decay.t_min=10").unwrap();
        apply_override(&mut v, "out=results").unwrap();
        assert_eq!(v["coin"]["g"], serde_json::json!(-0.5));
        assert_eq!(v["decay"]["t_min"], serde_json::json!(10));
        assert_eq!(v["out"], serde_json::json!("results"));
        assert!(apply_override(&mut v, "novalue").is_err());
        assert!(apply_override(&mut v, "out.x=1").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(load(None, &["colour=1".into()], None).is_err());
        assert!(load(None, &["decay.window=3".into()], None).is_err());
        assert!(load(None, &["schema_version=2".into()], None).is_err());
        assert!(load(None, &["steps=5".into()], None).unwrap().steps == 5);
    }

    fn keys(v: &Value) -> Vec<String> {
        let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
        k.sort();
        k
    }

    #[test]
    fn schema_lists_every_field() {
        let schema: Value = serde_json::from_str(SCHEMA).unwrap();
        let cfg = serde_json::to_value(ExperimentConfig::default()).unwrap();
        assert_eq!(keys(&schema["properties"]), keys(&cfg));
        for section in ["decay", "weak_limit", "scatter", "recover", "recorder"] {
            assert_eq!(keys(&schema["properties"][section]["properties"]), keys(&cfg[section]), "{section}");
        }
        assert_eq!(schema["properties"]["schema_version"]["const"], serde_json::json!(SCHEMA_VERSION));
    }
}
