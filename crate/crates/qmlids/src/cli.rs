//! Command-line front end.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{load_config, parse_config, ExperimentConfig};
use crate::error::{Error, Result};
use crate::formats::{read_circuit, read_edge_list};
use crate::manifest::Manifest;
use crate::pipeline;
use crate::synth::{SynthConfig, SynthKind};

#[derive(Debug, Parser)]
#[command(name = "qmlids", version, about = "Quantum machine learning experiments for network intrusion detection")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set preprocess.train_fraction=0.8`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the model grid.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Exact statevector expectations.
    #[arg(long, global = true, conflicts_with = "shots")]
    pub exact: bool,
    /// Sample with this many shots.
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    /// Noise preset name; implies shot sampling unless --exact.
    #[arg(long, global = true)]
    pub noise: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Write a synthetic data set to <out>/<kind>.csv.
    Synth {
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        n_per_class: Option<usize>,
        #[arg(long)]
        dims: Option<usize>,
        #[arg(long)]
        classes: Option<usize>,
    },
    /// Ingest and preprocess; writes train/test splits.
    Prepare {
        /// Input CSV; overrides data.csv / data.synth.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Fit the model grid on the prepared training split.
    Train {
        /// Directory holding the prepared split (default: --out).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Score the prepared test split; writes reports and alerts.
    Evaluate {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Export the quantum-kernel Gram matrix of the training split.
    Kernel {
        #[arg(long)]
        data: Option<PathBuf>,
        /// Id of a qsvm model in the grid.
        #[arg(long)]
        model: Option<String>,
    },
    /// Instruction counts per optimization level for a circuit file.
    Transpile {
        circuit: PathBuf,
        /// Coupling edge list (`u v` per line).
        #[arg(long)]
        coupling: Option<PathBuf>,
    },
    /// Render report JSON files as a comparison table.
    Report {
        /// Report files (default: <out>/reports.json).
        inputs: Vec<PathBuf>,
    },
}

impl Cli {
    fn overrides(&self) -> Vec<String> {
        let mut sets = self.set.clone();
        if self.exact {
            sets.push("execution.mode=\"exact\"".into());
        }
        if let Some(n) = self.shots {
            sets.push("execution.mode=\"shots\"".into());
            sets.push(format!("execution.shots={n}"));
        }
        if let Some(p) = &self.noise {
            if !self.exact && self.shots.is_none() {
                sets.push("execution.mode=\"shots\"".into());
            }
            sets.push(format!("execution.noise={}", toml::Value::String(p.clone())));
        }
        sets
    }

    pub fn config(&self) -> Result<ExperimentConfig> {
        match &self.config {
            Some(p) => load_config(p, &self.overrides(), self.seed),
            None => parse_config("", &self.overrides(), self.seed, None),
        }
    }
}

fn report_failures(failures: &[(String, Error)]) -> Result<()> {
    for (id, e) in failures {
        eprintln!("qmlids: model `{id}`: {e}");
    }
    match failures.first() {
        Some((_, e)) => {
            let msg = format!("{} of the models failed", failures.len());
            Err(match e.exit_code() {
                3 => Error::Numerical(msg),
                1 => Error::Usage(msg),
                _ => Error::Data(msg),
            })
        }
        None => Ok(()),
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let config = cli.config()?;
    let out = &cli.out;
    let mut inputs: Vec<PathBuf> = cli.config.iter().cloned().collect();
    let data_dir = |d: &Option<PathBuf>| d.clone().unwrap_or_else(|| out.clone());
    let verb;
    let outputs = match &cli.verb {
        Verb::Synth { kind, n_per_class, dims, classes } => {
            verb = "synth";
            let mut s = config.data.synth.clone().unwrap_or(SynthConfig { seed: config.seed, ..SynthConfig::default() });
            if let Some(k) = kind {
                s.kind = k.parse::<SynthKind>()?;
            }
            s.n_per_class = n_per_class.unwrap_or(s.n_per_class);
            s.dims = dims.unwrap_or(s.dims);
            s.classes = classes.unwrap_or(s.classes);
            pipeline::synth(&s, out)?
        }
        Verb::Prepare { data } => {
            verb = "prepare";
            inputs.extend(data.iter().chain(&config.data.csv).cloned());
            pipeline::prepare(&config, data.as_deref(), out)?
        }
        Verb::Train { data } => {
            verb = "train";
            let d = data_dir(data);
            inputs.extend([d.join(pipeline::TRAIN_CSV), d.join(pipeline::PREPARED)]);
            let r = pipeline::train(&config, &d, out)?;
            Manifest::new(verb, &config, &inputs, &r.written)?.write(out)?;
            return report_failures(&r.failures);
        }
        Verb::Evaluate { data } => {
            verb = "evaluate";
            let d = data_dir(data);
            inputs.extend([d.join(pipeline::TEST_CSV), d.join(pipeline::PREPARED)]);
            let r = pipeline::evaluate(&config, &d, out)?;
            Manifest::new(verb, &config, &inputs, &r.written)?.write(out)?;
            return report_failures(&r.failures);
        }
        Verb::Kernel { data, model } => {
            verb = "kernel";
            let d = data_dir(data);
            inputs.push(d.join(pipeline::TRAIN_CSV));
            pipeline::kernel(&config, &d, out, model.as_deref())?
        }
        Verb::Transpile { circuit, coupling } => {
            verb = "transpile";
            let c = read_circuit(circuit)?;
            let mut base = config.transpile.clone();
            inputs.push(circuit.clone());
            if let Some(p) = coupling {
                base.coupling = Some(read_edge_list(p)?);
                inputs.push(p.clone());
            }
            print!("{}", pipeline::transpile_text(&pipeline::transpile_counts(&c, &base)?));
            Vec::new()
        }
        Verb::Report { inputs: files } => {
            verb = "report";
            let files = if files.is_empty() { vec![out.join(pipeline::REPORTS)] } else { files.clone() };
            inputs.extend(files.iter().cloned());
            let (text, written) = pipeline::report(&files, out)?;
            print!("{text}");
            written
        }
    };
    Manifest::new(verb, &config, &inputs, &outputs)?.write(out)?;
    Ok(())
}

/// Parses `argv`, runs, and maps the outcome to an exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let run_it = || run(&cli);
    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(run_it),
            Err(e) => Err(Error::Usage(format!("--jobs: {e}"))),
        },
        None => run_it(),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qmlids: {e}");
            e.exit_code()
        }
    }
}
