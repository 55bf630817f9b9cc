use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::variational::Variational;
use super::{check_binary, BinaryClassifier};
use crate::circuitlib::{AnsatzKind, AnsatzSpec, Entanglement, FeatureMapKind, FeatureMapSpec};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::optimizers::{OptimizerConfig, OptimizerKind, TraceEntry};
use crate::sim::{Executor, ZObservable};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqcConfig {
    pub feature_map: FeatureMapSpec,
    pub ansatz: AnsatzSpec,
    /// Defaults to the parity of all qubits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ZObservable>,
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub threshold: f64,
    /// Initial parameters are uniform in `[-init_scale, init_scale]`.
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

fn default_init_scale() -> f64 {
    PI
}

impl VqcConfig {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            feature_map: FeatureMapSpec::new(FeatureMapKind::PauliFeatureMap, num_qubits).with_pauli_strings(&["Y"]),
            ansatz: AnsatzSpec::new(AnsatzKind::RealAmplitudes, num_qubits).with_reps(2).with_entanglement(Entanglement::Linear),
            observable: None,
            optimizer: OptimizerConfig::new(OptimizerKind::Spsa, 200),
            threshold: 0.0,
            init_scale: PI,
        }
    }
}

/// Variational quantum classifier: score `⟨obs⟩` after feature map and ansatz,
/// trained on squared error against ±1 labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vqc {
    pub config: VqcConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEntry>,
}

impl Vqc {
    pub fn new(config: VqcConfig) -> Self {
        Self { config, theta: None, trace: Vec::new() }
    }

    fn observable(&self) -> Result<ZObservable> {
        let n = self.config.feature_map.num_qubits;
        match &self.config.observable {
            Some(o) if o.num_qubits() != n => Err(Error::ObservableLength { expected: n, got: o.num_qubits() }),
            Some(o) => Ok(o.clone()),
            None => Ok(ZObservable::parity(n)),
        }
    }

    /// Checks the configuration and, when trained, the parameter count.
    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        if c.feature_map.num_qubits != c.ansatz.num_qubits {
            return Err(Error::WidthMismatch { left: c.feature_map.num_qubits, right: c.ansatz.num_qubits });
        }
        c.feature_map.validate()?;
        c.ansatz.validate()?;
        c.optimizer.validate()?;
        self.observable()?;
        if let Some(t) = &self.theta {
            if t.len() != c.ansatz.num_parameters() {
                return Err(Error::Shape(alloc::format!("{} parameters, ansatz needs {}", t.len(), c.ansatz.num_parameters())));
            }
        }
        Ok(())
    }

    /// Trains from the configured seeded start.
    pub fn fit_from(&mut self, x: &Matrix, y: &[f64], theta0: Option<&[f64]>, ex: &Executor) -> Result<()> {
        self.validate()?;
        check_binary(x, y)?;
        let fm = self.config.feature_map.build()?;
        let ansatz = self.config.ansatz.build()?;
        let obs = self.observable()?;
        let v = Variational {
            feature_map: &fm,
            template: ansatz.circuit(),
            num_params: ansatz.num_parameters(),
            observable: &obs,
            shared: false,
        };
        let start = match theta0 {
            Some(t) => t.to_vec(),
            None => v.initial_theta(self.config.optimizer.seed, self.config.init_scale),
        };
        let out = v.train(x, y, &start, &self.config.optimizer, ex)?;
        self.theta = Some(out.theta);
        self.trace = out.trace;
        Ok(())
    }

    /// Raw scores in `[-1, 1]`.
    pub fn scores(&self, x: &Matrix, ex: &Executor) -> Result<Vec<f64>> {
        let theta = self.theta.as_ref().ok_or(Error::Untrained)?;
        self.validate()?;
        let fm = self.config.feature_map.build()?;
        let ansatz = self.config.ansatz.build()?;
        let obs = self.observable()?;
        let v = Variational {
            feature_map: &fm,
            template: ansatz.circuit(),
            num_params: ansatz.num_parameters(),
            observable: &obs,
            shared: false,
        };
        v.scores(x, theta, ex, 1 << 50)
    }
}

impl BinaryClassifier for Vqc {
    fn fit(&mut self, x: &Matrix, y: &[f64], ex: &Executor) -> Result<()> {
        self.fit_from(x, y, None, ex)
    }

    /// Score minus threshold.
    fn decision_function(&self, x: &Matrix, ex: &Executor) -> Result<Vec<f64>> {
        Ok(self.scores(x, ex)?.into_iter().map(|s| s - self.config.threshold).collect())
    }
}
