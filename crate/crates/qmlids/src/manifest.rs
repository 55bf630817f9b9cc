//! Per-run manifest: inputs, outputs, seed, config and module defaults.

use std::path::{Path, PathBuf};

use qmlids_core::baselines::ForestConfig;
use qmlids_core::models::{QcnnConfig, QsvmConfig, SmoConfig, VqcConfig};
use qmlids_core::optimizers::OptimizerConfig;
use qmlids_core::transpiler::TranspileConfig;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ExecutionConfig, ExperimentConfig};
use crate::error::{Error, Result};
use crate::formats::{noise_from_toml, write_json, PRESETS_TOML};
use crate::preprocess::PreprocessConfig;
use crate::synth::SynthConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), sha256: hex::encode(Sha256::digest(bytes)) })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub verb: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub defaults: Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

/// Default settings of every module, shown at a 4-qubit width where the
/// default depends on it.
pub fn module_defaults() -> Value {
    json!({
        "preprocess": PreprocessConfig::default(),
        "synth": SynthConfig::default(),
        "execution": ExecutionConfig::default(),
        "transpile": TranspileConfig::default(),
        "optimizer": OptimizerConfig::default(),
        "vqc": VqcConfig::new(4),
        "qsvm": QsvmConfig::new(4),
        "qcnn": QcnnConfig::new(4),
        "smo": SmoConfig::default(),
        "random_forest": ForestConfig::default(),
        "noise_presets": noise_from_toml(PRESETS_TOML).expect("bundled presets parse"),
    })
}

impl Manifest {
    pub fn new(verb: &str, config: &ExperimentConfig, inputs: &[PathBuf], outputs: &[PathBuf]) -> Result<Self> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            verb: verb.into(),
            seed: config.seed,
            config_hash: config.hash(),
            config: config.clone(),
            defaults: module_defaults(),
            inputs: inputs.iter().map(|p| FileDigest::of(p)).collect::<Result<_>>()?,
            outputs: outputs.iter().map(|p| FileDigest::of(p)).collect::<Result<_>>()?,
        })
    }

    /// Writes `<out>/manifests/<verb>.json` and returns its path.
    pub fn write(&self, out: &Path) -> Result<PathBuf> {
        let path = out.join("manifests").join(format!("{}.json", self.verb));
        write_json(&path, self)?;
        Ok(path)
    }
}
