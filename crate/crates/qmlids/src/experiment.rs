//! Model grid: building, training, scoring, metrics and alerts.

use std::time::Instant;

use qmlids_core::baselines::{ClassicalKernel, ClassicalSvm, ForestConfig, RandomForest};
use qmlids_core::linalg::Matrix;
use qmlids_core::metrics::{evaluate, ClassMetrics};
use qmlids_core::models::{BinaryClassifier, OneVsRest, Qcnn, QcnnConfig, Qsvm, QsvmConfig, Vqc, VqcConfig};
use qmlids_core::optimizers::TraceEntry;
use qmlids_core::rng::mix;
use qmlids_core::sim::Executor;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Vqc,
    Qsvm,
    Qcnn,
    SvmRbf,
    SvmLinear,
    RandomForest,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Vqc => "vqc",
            Self::Qsvm => "qsvm",
            Self::Qcnn => "qcnn",
            Self::SvmRbf => "svm_rbf",
            Self::SvmLinear => "svm_linear",
            Self::RandomForest => "random_forest",
        }
    }

    pub fn is_quantum(self) -> bool {
        matches!(self, Self::Vqc | Self::Qsvm | Self::Qcnn)
    }
}

/// One grid entry. Every key besides `id` and `kind` overrides the model's
/// default configuration, merged key by key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: ModelKind,
    #[serde(flatten)]
    pub params: Map<String, Value>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self { id: None, kind, params: Map::new() }
    }

    pub fn with(mut self, key: &str, value: Value) -> Self {
        self.params.insert(key.into(), value);
        self
    }

    pub fn id(&self) -> String {
        self.id.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    /// Executor seed for this model; independent of grid position.
    pub fn stream_seed(&self, seed: u64) -> u64 {
        let h = Sha256::digest(self.id().as_bytes());
        mix(seed, u64::from_le_bytes(h[..8].try_into().expect("8 bytes")))
    }

    /// Fresh untrained classifier for `num_features` inputs.
    pub fn build(&self, num_features: usize, seed: u64) -> Result<Untrained> {
        let n = num_features;
        let ctx = |e: Error| Error::Config(format!("model `{}`: {e}", self.id()));
        Ok(match self.kind {
            ModelKind::Vqc => {
                let mut d = VqcConfig::new(n);
                d.optimizer.seed = seed;
                let c: VqcConfig = merged(&d, &self.params).map_err(ctx)?;
                let m = Vqc::new(c);
                m.validate().map_err(|e| ctx(e.into()))?;
                Untrained::Binary(BinaryModel::Vqc(m))
            }
            ModelKind::Qsvm => {
                let c: QsvmConfig = merged(&QsvmConfig::new(n), &self.params).map_err(ctx)?;
                let m = Qsvm::new(c);
                m.validate().map_err(|e| ctx(e.into()))?;
                Untrained::Binary(BinaryModel::Qsvm(m))
            }
            ModelKind::Qcnn => {
                let mut d = QcnnConfig::new(n);
                d.optimizer.seed = seed;
                let c: QcnnConfig = merged(&d, &self.params).map_err(ctx)?;
                let m = Qcnn::new(c).map_err(|e| ctx(e.into()))?;
                m.validate().map_err(|e| ctx(e.into()))?;
                Untrained::Binary(BinaryModel::Qcnn(m))
            }
            ModelKind::SvmRbf | ModelKind::SvmLinear => {
                let p: ClassicalParams = merged(&ClassicalParams::default(), &self.params).map_err(ctx)?;
                let kernel = match self.kind {
                    ModelKind::SvmRbf => ClassicalKernel::Rbf { gamma: p.gamma },
                    _ => ClassicalKernel::Linear,
                };
                Untrained::Binary(BinaryModel::ClassicalSvm(ClassicalSvm::new(kernel, p.c)))
            }
            ModelKind::RandomForest => {
                let d = ForestConfig { seed, ..ForestConfig::default() };
                let c: ForestConfig = merged(&d, &self.params).map_err(ctx)?;
                c.validate().map_err(|e| ctx(e.into()))?;
                Untrained::Forest(c)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ClassicalParams {
    c: f64,
    gamma: Option<f64>,
}

impl Default for ClassicalParams {
    fn default() -> Self {
        Self { c: 1.0, gamma: None }
    }
}

/// Keys that default configurations omit when unset.
const OPTIONAL_KEYS: [&str; 3] = ["observable", "pauli_strings", "rotation_blocks"];

fn merge_into(base: &mut Value, patch: &Value, path: &str) -> Result<()> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                let here = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() => merge_into(slot, v, &here)?,
                    Some(slot) => *slot = v.clone(),
                    None if OPTIONAL_KEYS.contains(&k.as_str()) => {
                        b.insert(k.clone(), v.clone());
                    }
                    None => return Err(Error::Config(format!("unknown key `{here}`"))),
                }
            }
            Ok(())
        }
        (b, p) => {
            *b = p.clone();
            Ok(())
        }
    }
}

/// `default` with `params` merged over it.
fn merged<T: Serialize + DeserializeOwned>(default: &T, params: &Map<String, Value>) -> Result<T> {
    let mut base = serde_json::to_value(default)?;
    merge_into(&mut base, &Value::Object(params.clone()), "")?;
    serde_json::from_value(base).map_err(|e| Error::Config(e.to_string()))
}

/// Binary classifiers that one-vs-rest can wrap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BinaryModel {
    Vqc(Vqc),
    Qsvm(Qsvm),
    Qcnn(Qcnn),
    ClassicalSvm(ClassicalSvm),
}

impl BinaryModel {
    fn validate(&self) -> qmlids_core::Result<()> {
        match self {
            Self::Vqc(m) => m.validate(),
            Self::Qsvm(m) => m.validate(),
            Self::Qcnn(m) => m.validate(),
            Self::ClassicalSvm(m) => m.validate(),
        }
    }

    fn trace(&self) -> &[TraceEntry] {
        match self {
            Self::Vqc(m) => &m.trace,
            Self::Qcnn(m) => &m.trace,
            _ => &[],
        }
    }
}

impl BinaryClassifier for BinaryModel {
    fn fit(&mut self, x: &Matrix, y: &[f64], ex: &Executor) -> qmlids_core::Result<()> {
        match self {
            Self::Vqc(m) => m.fit(x, y, ex),
            Self::Qsvm(m) => m.fit(x, y, ex),
            Self::Qcnn(m) => m.fit(x, y, ex),
            Self::ClassicalSvm(m) => m.fit(x, y, ex),
        }
    }

    fn decision_function(&self, x: &Matrix, ex: &Executor) -> qmlids_core::Result<Vec<f64>> {
        match self {
            Self::Vqc(m) => m.decision_function(x, ex),
            Self::Qsvm(m) => m.decision_function(x, ex),
            Self::Qcnn(m) => m.decision_function(x, ex),
            Self::ClassicalSvm(m) => m.decision_function(x, ex),
        }
    }
}

#[allow(clippy::large_enum_variant)] // one per model, short-lived
pub enum Untrained {
    Binary(BinaryModel),
    Forest(ForestConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Classifier {
    Binary { model: BinaryModel },
    OneVsRest { models: OneVsRest<BinaryModel> },
    Forest { forest: RandomForest },
}

/// A trained grid entry as written to disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub id: String,
    pub spec: ModelSpec,
    pub class_names: Vec<String>,
    pub num_features: usize,
    pub classifier: Classifier,
}

impl SavedModel {
    pub fn validate(&self) -> Result<()> {
        let k = self.class_names.len();
        match &self.classifier {
            Classifier::Binary { model } => {
                if k != 2 {
                    return Err(Error::Data(format!("model `{}`: binary model with {k} classes", self.id)));
                }
                model.validate()?;
            }
            Classifier::OneVsRest { models } => {
                if models.models.len() != k {
                    return Err(Error::Data(format!("model `{}`: {} one-vs-rest members for {k} classes", self.id, models.models.len())));
                }
                models.models.iter().try_for_each(BinaryModel::validate)?;
            }
            Classifier::Forest { forest } => {
                forest.validate()?;
                if forest.num_classes != k || forest.num_features != self.num_features {
                    return Err(Error::Data(format!("model `{}`: forest shape does not match", self.id)));
                }
            }
        }
        Ok(())
    }

    /// Predicted classes and, per row, the score behind the prediction.
    pub fn predict(&self, x: &Matrix, ex: &Executor) -> Result<(Vec<usize>, Vec<f64>)> {
        if x.cols() != self.num_features {
            return Err(Error::Data(format!("model `{}` expects {} features, got {}", self.id, self.num_features, x.cols())));
        }
        Ok(match &self.classifier {
            Classifier::Binary { model } => {
                let s = model.decision_function(x, ex)?;
                (s.iter().map(|&v| usize::from(v >= 0.0)).collect(), s)
            }
            Classifier::OneVsRest { models } => {
                let scores = models.scores(x, ex)?;
                let pred = qmlids_core::models::argmax_scores(&scores, x.rows());
                let s = pred.iter().enumerate().map(|(r, &c)| scores[c][r]).collect();
                (pred, s)
            }
            Classifier::Forest { forest } => {
                let votes = forest.vote_fractions(x)?;
                let pred = forest.predict(x)?;
                let s = pred.iter().zip(&votes).map(|(&c, v)| v[c]).collect();
                (pred, s)
            }
        })
    }

    /// Loss traces of variational members, labeled by class for one-vs-rest.
    pub fn traces(&self) -> Vec<(String, &[TraceEntry])> {
        match &self.classifier {
            Classifier::Binary { model } if !model.trace().is_empty() => vec![(self.id.clone(), model.trace())],
            Classifier::OneVsRest { models } => models
                .models
                .iter()
                .zip(&self.class_names)
                .filter(|(m, _)| !m.trace().is_empty())
                .map(|(m, c)| (format!("{}.{c}", self.id), m.trace()))
                .collect(),
            _ => Vec::new(),
        }
    }
}

pub fn train_model(spec: &ModelSpec, train: &Dataset, config: &ExperimentConfig) -> Result<SavedModel> {
    let ex = config.execution.executor(&config.transpile, spec.stream_seed(config.seed))?;
    let x = &train.features;
    let classifier = match spec.build(train.num_features(), config.seed)? {
        Untrained::Forest(cfg) => Classifier::Forest { forest: RandomForest::fit(x, &train.labels, train.num_classes(), &cfg)? },
        Untrained::Binary(mut m) if train.num_classes() == 2 => {
            m.fit(x, &train.signed_labels(), &ex)?;
            Classifier::Binary { model: m }
        }
        Untrained::Binary(m) => Classifier::OneVsRest {
            models: OneVsRest::fit(&m, x, &train.labels, train.num_classes(), &ex)?,
        },
    };
    Ok(SavedModel {
        id: spec.id(),
        spec: spec.clone(),
        class_names: train.class_names.clone(),
        num_features: train.num_features(),
        classifier,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedClassMetrics {
    pub class: String,
    #[serde(flatten)]
    pub metrics: ClassMetrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model_id: String,
    pub model_kind: ModelKind,
    pub dataset: String,
    pub per_class: Vec<NamedClassMetrics>,
    pub macro_f1: f64,
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub test_size: usize,
    pub config_hash: String,
    pub wall_clock_s: f64,
}

impl MetricsReport {
    /// F1 of the named class, if present.
    pub fn class_f1(&self, class: &str) -> Option<f64> {
        self.per_class.iter().find(|c| c.class == class).map(|c| c.metrics.f1)
    }
}

/// One record per test row predicted as an attack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    pub row_index: usize,
    pub predicted_class: String,
    pub score: f64,
}

pub struct Evaluation {
    pub report: MetricsReport,
    pub alerts: Vec<Alert>,
}

/// Benign class index used to decide which predictions raise alerts.
pub fn benign_index(class_names: &[String], benign: &str) -> Option<usize> {
    class_names.iter().position(|c| c == benign)
}

pub fn evaluate_model(model: &SavedModel, test: &Dataset, config: &ExperimentConfig) -> Result<Evaluation> {
    let start = Instant::now();
    model.validate()?;
    if model.class_names != test.class_names {
        return Err(Error::Data(format!("model `{}` was trained on different classes", model.id)));
    }
    let ex = config.execution.executor(&config.transpile, model.spec.stream_seed(config.seed))?;
    let (pred, scores) = model.predict(&test.features, &ex)?;
    let m = evaluate(&test.labels, &pred, test.num_classes())?;
    let benign = benign_index(&test.class_names, &config.preprocess.benign_class);
    let alerts = pred
        .iter()
        .zip(&scores)
        .enumerate()
        .filter(|(_, (&c, _))| Some(c) != benign)
        .map(|(row_index, (&c, &score))| Alert { row_index, predicted_class: test.class_names[c].clone(), score })
        .collect();
    let report = MetricsReport {
        model_id: model.id.clone(),
        model_kind: model.spec.kind,
        dataset: config.name.clone(),
        per_class: m
            .per_class
            .into_iter()
            .zip(&test.class_names)
            .map(|(metrics, class)| NamedClassMetrics { class: class.clone(), metrics })
            .collect(),
        macro_f1: m.macro_f1,
        accuracy: m.accuracy,
        confusion: m.confusion,
        test_size: test.len(),
        config_hash: config.hash(),
        wall_clock_s: start.elapsed().as_secs_f64(),
    };
    Ok(Evaluation { report, alerts })
}

/// Per-model outcome; failures keep the other models' results.
pub struct ModelRun {
    pub id: String,
    pub result: Result<(SavedModel, Evaluation)>,
}

/// Trains and evaluates every model in the grid, in parallel on the current
/// rayon pool. Results come back in grid order.
pub fn run_experiment(train: &Dataset, test: &Dataset, config: &ExperimentConfig) -> Vec<ModelRun> {
    config
        .models
        .par_iter()
        .map(|spec| {
            let start = Instant::now();
            let result = train_model(spec, train, config).and_then(|m| {
                let mut ev = evaluate_model(&m, test, config)?;
                ev.report.wall_clock_s = start.elapsed().as_secs_f64();
                Ok((m, ev))
            });
            ModelRun { id: spec.id(), result }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_merge_and_reject_typos() {
        let spec = ModelSpec::new(ModelKind::Vqc).with("optimizer", json!({"kind": "adam", "max_iters": 7}));
        let Untrained::Binary(BinaryModel::Vqc(m)) = spec.build(3, 5).unwrap() else { panic!() };
        assert_eq!(m.config.optimizer.max_iters, 7);
        assert_eq!(m.config.optimizer.seed, 5);
        assert_eq!(m.config.feature_map.num_qubits, 3);
        let bad = ModelSpec::new(ModelKind::Vqc).with("optimiser", json!({}));
        assert!(bad.build(3, 0).is_err());
        let bad = ModelSpec::new(ModelKind::Qsvm).with("feature_map", json!({"repz": 2}));
        assert!(bad.build(3, 0).is_err());
    }

    #[test]
    fn stream_seed_depends_on_id_only() {
        let a = ModelSpec::new(ModelKind::Qsvm);
        let mut b = a.clone();
        b.params.insert("c".into(), json!(3.0));
        assert_eq!(a.stream_seed(1), b.stream_seed(1));
        b.id = Some("other".into());
        assert_ne!(a.stream_seed(1), b.stream_seed(1));
    }
}
