//! Experiment configuration files.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use hawkes_core::model::ModelParams;
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(deserialize_with = "checked_model")]
    pub model: ModelParams,
    pub experiment: Experiment,
    pub seed: u64,
    #[serde(default = "one")]
    pub replicas: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn one() -> usize {
    1
}

fn checked_model<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ModelParams, D::Error> {
    let m = ModelParams::deserialize(d)?;
    m.validate().map_err(serde::de::Error::custom)?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Simulate(Simulate),
    StationaryLinear(StationaryLinear),
    Cesaro(Cesaro),
    ExpmemStationary(ExpmemStationary),
    TransientScaling(TransientScaling),
    Couple(Couple),
    Validate(Validate),
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulate {
    pub n_events: usize,
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Most recent gap first; empty means no past events.
    #[serde(default)]
    pub initial_gaps: Vec<f64>,
    #[serde(default = "default_tol")]
    pub inversion_tol: f64,
    #[serde(default = "default_min_gap")]
    pub min_gap: f64,
}

fn default_min_gap() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryLinear {
    /// Backward samples per replica.
    pub samples: usize,
    #[serde(rename = "K", alias = "k")]
    pub k: usize,
    #[serde(default = "default_backward_tol")]
    pub tol: f64,
    #[serde(default = "default_depth_cap")]
    pub depth_cap: usize,
}

fn default_backward_tol() -> f64 {
    1e-9
}

fn default_depth_cap() -> usize {
    1 << 16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cesaro {
    pub n_events: usize,
    #[serde(default)]
    pub checkpoints: Option<Vec<usize>>,
    #[serde(default = "default_tol")]
    pub inversion_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpmemStationary {
    pub n_burn: usize,
    pub n_keep: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransientScaling {
    pub n_events: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Couple {
    /// Gaps of the history `z`, most recent first.
    pub z_gaps: Vec<f64>,
    pub trials: usize,
    #[serde(default = "default_walks")]
    pub walks: usize,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_walks() -> usize {
    2000
}

fn default_margin() -> f64 {
    0.05
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Validate {
    #[serde(default)]
    pub quick: bool,
}

/// Config problems, reported as `file:line:column: message`.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn parse(text: &str, origin: &Path) -> std::result::Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        // serde_json appends " at line L column C"; move it to the front
        let bare = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m);
        ConfigError(format!("{}:{}:{}: {bare}", origin.display(), e.line(), e.column()))
    })?;
    if cfg.replicas == 0 {
        let line = text
            .lines()
            .position(|l| l.contains("\"replicas\""))
            .map_or(1, |i| i + 1);
        return Err(ConfigError(format!(
            "{}:{line}:1: replicas must be >= 1",
            origin.display()
        )));
    }
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| anyhow!(ConfigError(format!("{}: {e}", path.display()))))?;
    Ok(parse(&text, path)?)
}
