use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::variational::Variational;
use super::{check_binary, BinaryClassifier};
use crate::circuit::{Circuit, GateKind, Instruction, ParamExpr};
use crate::circuitlib::{param_symbol, FeatureMapKind, FeatureMapSpec};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::optimizers::{OptimizerConfig, OptimizerKind, TraceEntry};
use crate::sim::{Executor, ZObservable};

pub const QCNN_MIN_QUBITS: usize = 2;
pub const QCNN_MAX_QUBITS: usize = 12;

/// One stage of the QCNN plan. Parameters are indices into the shared
/// parameter vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QcnnLayer {
    /// Block on each pair: `RY(a)⊗RY(a)`, `CX(i, j)`, `RY(b)` on `i`, `RY(c)` on `j`.
    Conv { pairs: Vec<(usize, usize)>, params: [usize; 3] },
    /// `CX(i → j)` then `RY(p)` on `j`; `i` leaves the active set.
    Pool { pairs: Vec<(usize, usize)>, param: usize },
}

/// Alternating conv/pool plan down to one active qubit.
pub fn qcnn_plan(num_qubits: usize) -> Result<(Vec<QcnnLayer>, usize)> {
    if !(QCNN_MIN_QUBITS..=QCNN_MAX_QUBITS).contains(&num_qubits) {
        return Err(Error::InvalidArgument(alloc::format!(
            "QCNN width must be in {QCNN_MIN_QUBITS}..={QCNN_MAX_QUBITS}, got {num_qubits}"
        )));
    }
    let mut active: Vec<usize> = (0..num_qubits).collect();
    let mut layers = Vec::new();
    let mut k = 0;
    while active.len() > 1 {
        let mut pairs: Vec<(usize, usize)> = active.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        pairs.extend(active[1..].chunks_exact(2).map(|c| (c[0], c[1])));
        layers.push(QcnnLayer::Conv { pairs, params: [k, k + 1, k + 2] });
        k += 3;
        let pool: Vec<(usize, usize)> = active.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        layers.push(QcnnLayer::Pool { pairs: pool, param: k });
        k += 1;
        // keep the higher index of each pair and an unpaired tail
        active = active.chunks(2).map(|c| c[c.len() - 1]).collect();
    }
    Ok((layers, active[0]))
}

fn template(num_qubits: usize, layers: &[QcnnLayer]) -> Result<Circuit> {
    let mut c = Circuit::new(num_qubits)?;
    let p = |k: usize| ParamExpr::symbol(param_symbol(k));
    for layer in layers {
        match layer {
            QcnnLayer::Conv { pairs, params: [a, b, cc] } => {
                for &(i, j) in pairs {
                    c.append(Instruction::rotation(GateKind::RY, &[i], p(*a)))?;
                    c.append(Instruction::rotation(GateKind::RY, &[j], p(*a)))?;
                    c.append(Instruction::gate(GateKind::CX, &[i, j]))?;
                    c.append(Instruction::rotation(GateKind::RY, &[i], p(*b)))?;
                    c.append(Instruction::rotation(GateKind::RY, &[j], p(*cc)))?;
                }
            }
            QcnnLayer::Pool { pairs, param } => {
                for &(i, j) in pairs {
                    c.append(Instruction::gate(GateKind::CX, &[i, j]))?;
                    c.append(Instruction::rotation(GateKind::RY, &[j], p(*param)))?;
                }
            }
        }
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QcnnConfig {
    pub feature_map: FeatureMapSpec,
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub threshold: f64,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

fn default_init_scale() -> f64 {
    PI
}

impl QcnnConfig {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            feature_map: FeatureMapSpec::new(FeatureMapKind::PauliFeatureMap, num_qubits).with_pauli_strings(&["Y"]),
            optimizer: OptimizerConfig::new(OptimizerKind::Spsa, 200),
            threshold: 0.0,
            init_scale: PI,
        }
    }
}

/// Quantum convolutional network with weight-shared layers; the score is
/// `⟨Z⟩` on the last active qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Qcnn {
    pub config: QcnnConfig,
    pub layers: Vec<QcnnLayer>,
    pub readout: usize,
    pub num_params: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEntry>,
}

impl Qcnn {
    pub fn new(config: QcnnConfig) -> Result<Self> {
        let (layers, readout) = qcnn_plan(config.feature_map.num_qubits)?;
        let num_params = layers.iter().map(|l| if matches!(l, QcnnLayer::Conv { .. }) { 3 } else { 1 }).sum();
        Ok(Self { config, layers, readout, num_params, theta: None, trace: Vec::new() })
    }

    pub fn num_qubits(&self) -> usize {
        self.config.feature_map.num_qubits
    }

    /// Parameterized circuit in `θ0 … θ(m−1)`.
    pub fn circuit(&self) -> Result<Circuit> {
        template(self.num_qubits(), &self.layers)
    }

    pub fn observable(&self) -> Result<ZObservable> {
        ZObservable::on(self.num_qubits(), &[self.readout])
    }

    /// Rebuilds the plan and compares; used after deserializing.
    pub fn validate(&self) -> Result<()> {
        self.config.feature_map.validate()?;
        self.config.optimizer.validate()?;
        let fresh = Self::new(self.config.clone())?;
        if fresh.layers != self.layers || fresh.readout != self.readout || fresh.num_params != self.num_params {
            return Err(Error::InvalidArgument("QCNN layer plan does not match its width".into()));
        }
        if let Some(t) = &self.theta {
            if t.len() != self.num_params {
                return Err(Error::Shape(alloc::format!("{} parameters, QCNN needs {}", t.len(), self.num_params)));
            }
        }
        Ok(())
    }

    fn with_model<T>(&self, f: impl FnOnce(&Variational<'_>) -> Result<T>) -> Result<T> {
        let fm = self.config.feature_map.build()?;
        let c = self.circuit()?;
        let obs = self.observable()?;
        f(&Variational { feature_map: &fm, template: &c, num_params: self.num_params, observable: &obs, shared: true })
    }

    pub fn fit_from(&mut self, x: &Matrix, y: &[f64], theta0: Option<&[f64]>, ex: &Executor) -> Result<()> {
        self.validate()?;
        check_binary(x, y)?;
        let cfg = self.config.clone();
        let out = self.with_model(|v| {
            let start = match theta0 {
                Some(t) => t.to_vec(),
                None => v.initial_theta(cfg.optimizer.seed, cfg.init_scale),
            };
            v.train(x, y, &start, &cfg.optimizer, ex)
        })?;
        self.theta = Some(out.theta);
        self.trace = out.trace;
        Ok(())
    }

    /// Gradient of the training loss; shared parameters sum their per-gate
    /// shift terms.
    pub fn loss_gradient(&self, x: &Matrix, y: &[f64], theta: &[f64], ex: &Executor) -> Result<Vec<f64>> {
        check_binary(x, y)?;
        self.with_model(|v| v.loss_gradient(x, y, theta, ex))
    }

    pub fn scores(&self, x: &Matrix, ex: &Executor) -> Result<Vec<f64>> {
        let theta = self.theta.as_ref().ok_or(Error::Untrained)?;
        self.with_model(|v| v.scores(x, theta, ex, 1 << 50))
    }
}

impl BinaryClassifier for Qcnn {
    fn fit(&mut self, x: &Matrix, y: &[f64], ex: &Executor) -> Result<()> {
        self.fit_from(x, y, None, ex)
    }

    fn decision_function(&self, x: &Matrix, ex: &Executor) -> Result<Vec<f64>> {
        Ok(self.scores(x, ex)?.into_iter().map(|s| s - self.config.threshold).collect())
    }
}
