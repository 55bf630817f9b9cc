//! Experiment configuration: a TOML key tree with dotted-key overrides.
//!
//! ```toml
//! name = "blobs"
//! seed = 13
//!
//! [data.synth]            # or: [data] csv = "flows.csv"
//! kind = "blobs"
//! n_per_class = 100
//!
//! [preprocess]
//! target_dim = 4
//!
//! [execution]
//! mode = "exact"          # or "shots"
//! shots = 1024
//! noise = "brisbane"
//!
//! [transpile]
//! optimization_level = 1
//!
//! [[models]]
//! kind = "vqc"
//! optimizer = { kind = "adam", max_iters = 100 }
//! ```
//!
//! The top-level `seed` fills `preprocess.seed`, `data.synth.seed` and every
//! model seed that is not set explicitly.

use std::path::{Path, PathBuf};

use qmlids_core::sim::{Executor, Mode};
use qmlids_core::transpiler::TranspileConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::experiment::ModelSpec;
use crate::formats::noise_preset;
use crate::preprocess::PreprocessConfig;
use crate::synth::SynthConfig;

pub const DEFAULT_SEED: u64 = 13;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Flow-record CSV, relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthConfig>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecMode {
    #[default]
    Exact,
    Shots,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutionConfig {
    pub mode: ExecMode,
    pub shots: u64,
    /// Noise trajectories per circuit; 0 means one per shot.
    pub trajectories: u64,
    /// Bundled preset name; absent means noiseless.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
}

impl Default for ExecutionConfig {
    fn default() -> Self {
        Self { mode: ExecMode::Exact, shots: 1024, trajectories: 64, noise: None }
    }
}

impl ExecutionConfig {
    pub fn executor(&self, transpile: &TranspileConfig, seed: u64) -> Result<Executor> {
        let mode = match self.mode {
            ExecMode::Exact => Mode::Exact,
            ExecMode::Shots => Mode::Shots { shots: self.shots, trajectories: self.trajectories },
        };
        let noise = self.noise.as_deref().map(noise_preset).transpose()?;
        let ex = Executor::new(mode, noise, transpile.clone(), seed);
        ex.validate().map_err(|e| Error::Config(format!("execution: {e}")))?;
        Ok(ex)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub data: DataConfig,
    pub preprocess: PreprocessConfig,
    pub execution: ExecutionConfig,
    pub transpile: TranspileConfig,
    pub models: Vec<ModelSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            seed: DEFAULT_SEED,
            data: DataConfig::default(),
            preprocess: PreprocessConfig { seed: DEFAULT_SEED, ..PreprocessConfig::default() },
            execution: ExecutionConfig::default(),
            transpile: TranspileConfig::default(),
            models: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        self.transpile.validate().map_err(|e| Error::Config(format!("transpile: {e}")))?;
        if self.data.csv.is_some() && self.data.synth.is_some() {
            return Err(Error::Config("set only one of data.csv and data.synth".into()));
        }
        let mut ids = std::collections::BTreeSet::new();
        for m in &self.models {
            if !ids.insert(m.id()) {
                return Err(Error::Config(format!("duplicate model id `{}`", m.id())));
            }
        }
        self.execution.executor(&self.transpile, self.seed)?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serializes")))
    }
}

/// Parses `value` as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> Value {
    let doc = format!("v = {raw}");
    match doc.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.into())),
        Err(_) => Value::String(raw.into()),
    }
}

/// Applies `a.b.c=value`; numeric segments index arrays.
pub fn apply_override(root: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("override `{assignment}` is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Usage(format!("bad override key `{key}`")));
    }
    let value = parse_value(raw.trim());
    let mut cur: &mut Value = root
        .entry(parts[0])
        .or_insert_with(|| if parts.len() > 1 { Value::Table(Table::new()) } else { Value::Boolean(false) });
    for p in &parts[1..] {
        cur = match cur {
            Value::Table(t) => t.entry(*p).or_insert_with(|| Value::Table(Table::new())),
            Value::Array(a) => {
                let i: usize = p.parse().map_err(|_| Error::Usage(format!("`{p}` in `{key}` is not an index")))?;
                let len = a.len();
                a.get_mut(i).ok_or_else(|| Error::Usage(format!("index {i} in `{key}` out of range ({len})")))?
            }
            _ => return Err(Error::Usage(format!("`{key}` descends into a scalar"))),
        };
    }
    *cur = value;
    Ok(())
}

fn fill_seed(root: &mut Table, path: &[&str], seed: i64) {
    let mut cur = root;
    for p in &path[..path.len() - 1] {
        match cur.get_mut(*p) {
            Some(Value::Table(t)) => cur = t,
            _ => return,
        }
    }
    cur.entry(path[path.len() - 1]).or_insert(Value::Integer(seed));
}

/// Parses config text, applies overrides, then resolves seeds. `base`
/// anchors relative paths.
pub fn parse_config(text: &str, overrides: &[String], seed: Option<u64>, base: Option<&Path>) -> Result<ExperimentConfig> {
    let mut root: Table = text.parse().map_err(|e| Error::Config(format!("config: {e}")))?;
    for o in overrides {
        apply_override(&mut root, o)?;
    }
    if let Some(s) = seed {
        root.insert("seed".into(), Value::Integer(s as i64));
    }
    let s = match root.get("seed") {
        None => DEFAULT_SEED as i64,
        Some(Value::Integer(s)) if *s >= 0 => *s,
        Some(v) => return Err(Error::Config(format!("seed must be a non-negative integer, got {v}"))),
    };
    root.entry("seed").or_insert(Value::Integer(s));
    root.entry("preprocess").or_insert_with(|| Value::Table(Table::new()));
    fill_seed(&mut root, &["preprocess", "seed"], s);
    fill_seed(&mut root, &["data", "synth", "seed"], s);
    let mut cfg: ExperimentConfig = root.try_into().map_err(|e| Error::Config(format!("config: {e}")))?;
    if let (Some(csv), Some(b)) = (&cfg.data.csv, base) {
        if csv.is_relative() {
            cfg.data.csv = Some(b.join(csv));
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, overrides, seed, path.parent())
}
