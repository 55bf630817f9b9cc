//! File-level steps behind each command. Every step reads its inputs,
//! writes into an output directory and returns the paths it wrote.

use std::path::{Path, PathBuf};

use qmlids_core::circuit::Circuit;
use qmlids_core::models::{QsvmConfig, QuantumKernel};
use qmlids_core::transpiler::{transpile, TranspileConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::experiment::{evaluate_model, train_model, MetricsReport, ModelKind, ModelSpec, SavedModel};
use crate::formats::{read_json, write_json, write_text, write_trace};
use crate::ingest::ingest_csv;
use crate::preprocess::{preprocess, Fitted, PreprocessConfig};
use crate::report::comparison_table;
use crate::synth::{make_synthetic, SynthConfig};

pub const PREPARED: &str = "prepared.json";
pub const TRAIN_CSV: &str = "train.csv";
pub const TEST_CSV: &str = "test.csv";
pub const REPORTS: &str = "reports.json";

/// Metadata written next to the split CSVs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prepared {
    pub source: String,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub preprocess: PreprocessConfig,
    pub fitted: Fitted,
    pub train_log: Vec<String>,
    pub test_log: Vec<String>,
}

/// Writes `<out>/<kind>.csv`.
pub fn synth(cfg: &SynthConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let ds = make_synthetic(cfg)?;
    let path = out.join(format!("{}.csv", cfg.kind));
    create_dir(out)?;
    ds.write_csv(&path)?;
    Ok(vec![path])
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// The raw data set named by the config, or by `csv` when given.
pub fn load_raw(config: &ExperimentConfig, csv: Option<&Path>) -> Result<Dataset> {
    match (csv, config.data.csv.as_deref(), &config.data.synth) {
        (Some(p), _, _) | (None, Some(p), _) => ingest_csv(p, &config.preprocess),
        (None, None, Some(s)) => make_synthetic(s),
        (None, None, None) => Err(Error::Usage("no data: pass --data or set data.csv / data.synth".into())),
    }
}

pub fn prepare(config: &ExperimentConfig, csv: Option<&Path>, out: &Path) -> Result<Vec<PathBuf>> {
    let raw = load_raw(config, csv)?;
    let source = raw.provenance.source.clone();
    let split = preprocess(raw, &config.preprocess)?;
    create_dir(out)?;
    let (tr, te, meta) = (out.join(TRAIN_CSV), out.join(TEST_CSV), out.join(PREPARED));
    split.train.write_csv(&tr)?;
    split.test.write_csv(&te)?;
    let prepared = Prepared {
        source,
        class_names: split.train.class_names.clone(),
        feature_names: split.train.feature_names.clone(),
        preprocess: config.preprocess.clone(),
        fitted: split.fitted,
        train_log: split.train.provenance.transforms,
        test_log: split.test.provenance.transforms,
    };
    write_json(&meta, &prepared)?;
    Ok(vec![tr, te, meta])
}

/// Reads one prepared split from `dir`.
pub fn load_split(dir: &Path, file: &str) -> Result<Dataset> {
    let meta: Prepared = read_json(&dir.join(PREPARED))?;
    let mut ds = Dataset::read_csv(&dir.join(file), &meta.class_names)?;
    ds.provenance.transforms = if file == TEST_CSV { meta.test_log } else { meta.train_log };
    Ok(ds)
}

fn model_path(out: &Path, id: &str) -> PathBuf {
    out.join("models").join(format!("{id}.json"))
}

/// Outcome of a grid step: written files plus per-model failures.
#[derive(Debug, Default)]
pub struct GridOutput {
    pub written: Vec<PathBuf>,
    pub failures: Vec<(String, Error)>,
}

/// Fits every model in the grid on `<data>/train.csv`; writes model JSON and
/// loss traces.
pub fn train(config: &ExperimentConfig, data: &Path, out: &Path) -> Result<GridOutput> {
    if config.models.is_empty() {
        return Err(Error::Usage("config has no [[models]]".into()));
    }
    let train = load_split(data, TRAIN_CSV)?;
    let fitted: Vec<(String, Result<SavedModel>)> =
        config.models.par_iter().map(|spec| (spec.id(), train_model(spec, &train, config))).collect();
    let mut outcome = GridOutput::default();
    for (id, result) in fitted {
        match result {
            Ok(model) => {
                let p = model_path(out, &id);
                write_json(&p, &model)?;
                outcome.written.push(p);
                for (name, trace) in model.traces() {
                    let t = out.join("traces").join(format!("{name}.csv"));
                    write_trace(&t, trace)?;
                    outcome.written.push(t);
                }
            }
            Err(e) => outcome.failures.push((id, e)),
        }
    }
    Ok(outcome)
}

/// Ids of the models to evaluate: the config grid, else every model file.
fn model_ids(config: &ExperimentConfig, out: &Path) -> Result<Vec<String>> {
    if !config.models.is_empty() {
        return Ok(config.models.iter().map(ModelSpec::id).collect());
    }
    let dir = out.join("models");
    let mut ids: Vec<String> = std::fs::read_dir(&dir)
        .map_err(|e| Error::io(&dir, e))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let p = e.path();
            (p.extension()? == "json").then(|| p.file_stem()?.to_str().map(str::to_string)).flatten()
        })
        .collect();
    ids.sort();
    if ids.is_empty() {
        return Err(Error::Usage(format!("no trained models in {}", dir.display())));
    }
    Ok(ids)
}

/// Scores `<data>/test.csv` with every trained model; writes the report
/// array and one alert stream per model.
pub fn evaluate(config: &ExperimentConfig, data: &Path, out: &Path) -> Result<GridOutput> {
    let test = load_split(data, TEST_CSV)?;
    let ids = model_ids(config, out)?;
    let results: Vec<(String, Result<crate::experiment::Evaluation>)> = ids
        .par_iter()
        .map(|id| {
            let r = read_json::<SavedModel>(&model_path(out, id)).and_then(|m| evaluate_model(&m, &test, config));
            (id.clone(), r)
        })
        .collect();
    let mut outcome = GridOutput::default();
    let mut reports = Vec::new();
    for (id, r) in results {
        match r {
            Ok(ev) => {
                let mut lines = String::new();
                for a in &ev.alerts {
                    lines.push_str(&serde_json::to_string(a)?);
                    lines.push('\n');
                }
                let p = out.join("alerts").join(format!("{id}.jsonl"));
                write_text(&p, &lines)?;
                outcome.written.push(p);
                reports.push(ev.report);
            }
            Err(e) => outcome.failures.push((id, e)),
        }
    }
    let p = out.join(REPORTS);
    write_json(&p, &reports)?;
    outcome.written.insert(0, p);
    Ok(outcome)
}

/// Training Gram matrix under the first QSVM in the grid (or the default
/// QSVM feature map), as headerless CSV.
pub fn kernel(config: &ExperimentConfig, data: &Path, out: &Path, model: Option<&str>) -> Result<Vec<PathBuf>> {
    let train = load_split(data, TRAIN_CSV)?;
    let spec = match model {
        Some(id) => config
            .models
            .iter()
            .find(|m| m.id() == id)
            .cloned()
            .ok_or_else(|| Error::Usage(format!("no model `{id}` in config")))?,
        None => config.models.iter().find(|m| m.kind == ModelKind::Qsvm).cloned().unwrap_or(ModelSpec::new(ModelKind::Qsvm)),
    };
    if spec.kind != ModelKind::Qsvm {
        return Err(Error::Usage(format!("model `{}` is not a qsvm", spec.id())));
    }
    let crate::experiment::Untrained::Binary(crate::experiment::BinaryModel::Qsvm(q)) =
        spec.build(train.num_features(), config.seed)?
    else {
        unreachable!("qsvm spec builds a qsvm");
    };
    let cfg: QsvmConfig = q.config;
    let ex = config.execution.executor(&config.transpile, spec.stream_seed(config.seed))?;
    let gram = QuantumKernel::new(cfg.feature_map.build()?).matrix(&train.features, None, &ex, 0)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in gram.iter_rows() {
        w.write_record(r.iter().map(|v| v.to_string()))?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| Error::Data(e.to_string()))?).expect("ascii numbers");
    let p = out.join("kernel.csv");
    write_text(&p, &text)?;
    Ok(vec![p])
}

/// Instruction counts before and after each optimization level.
pub fn transpile_counts(circuit: &Circuit, base: &TranspileConfig) -> Result<Vec<(u8, usize, usize)>> {
    (0..=3u8)
        .map(|level| {
            let cfg = TranspileConfig { optimization_level: level, ..base.clone() };
            Ok((level, circuit.len(), transpile(circuit, &cfg)?.circuit.len()))
        })
        .collect()
}

pub fn transpile_text(rows: &[(u8, usize, usize)]) -> String {
    let mut s = String::from("level  before  after\n");
    for (l, b, a) in rows {
        s.push_str(&format!("{l:>5}  {b:>6}  {a:>5}\n"));
    }
    s
}

/// Renders `report.txt` and `report.csv` from one or more report arrays.
pub fn report(inputs: &[PathBuf], out: &Path) -> Result<(String, Vec<PathBuf>)> {
    let mut all: Vec<MetricsReport> = Vec::new();
    for p in inputs {
        all.extend(read_json::<Vec<MetricsReport>>(p)?);
    }
    if all.is_empty() {
        return Err(Error::Data("no reports to render".into()));
    }
    let table = comparison_table(&all);
    let text = table.to_text();
    let (t, c) = (out.join("report.txt"), out.join("report.csv"));
    write_text(&t, &text)?;
    write_text(&c, &table.to_csv()?)?;
    Ok((text, vec![t, c]))
}
