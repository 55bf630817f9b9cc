//! Synthetic stand-ins for flow-record data sets.

use std::f64::consts::PI;

use qmlids_core::circuitlib::{Entanglement, FeatureMap, FeatureMapKind, FeatureMapSpec};
use qmlids_core::linalg::Matrix;
use qmlids_core::models::quantum_kernel;
use qmlids_core::rng::SimRng;
use qmlids_core::sim::Executor;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Provenance};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    Blobs,
    XorRings,
    AdhocZz,
}

impl std::str::FromStr for SynthKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blobs" => Ok(Self::Blobs),
            "xor_rings" | "xor" => Ok(Self::XorRings),
            "adhoc_zz" | "adhoc" => Ok(Self::AdhocZz),
            other => Err(Error::Usage(format!("unknown synthetic kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for SynthKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Blobs => "blobs",
            Self::XorRings => "xor_rings",
            Self::AdhocZz => "adhoc_zz",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub kind: SynthKind,
    pub n_per_class: usize,
    pub dims: usize,
    pub classes: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { kind: SynthKind::Blobs, n_per_class: 100, dims: 4, classes: 2, seed: 13 }
    }
}

/// Minimum distance between blob centers, in units of the cluster σ.
pub const BLOB_SEPARATION: f64 = 8.0;
/// Gap around the axes left empty by the XOR generator.
pub const XOR_GAP: f64 = 0.1;
/// Minimum |k(x, a+) − k(x, a−)| kept by the kernel-anchor generator.
pub const ADHOC_MARGIN: f64 = 0.1;
pub const ADHOC_REPS: usize = 2;

fn class_names(classes: usize) -> Vec<String> {
    let mut names = vec!["benign".to_string()];
    if classes == 2 {
        names.push("attack".into());
    } else {
        names.extend((1..classes).map(|c| format!("attack{c}")));
    }
    names
}

pub fn make_synthetic(cfg: &SynthConfig) -> Result<Dataset> {
    if cfg.n_per_class < 4 {
        return Err(Error::Config(format!("n_per_class must be at least 4, got {}", cfg.n_per_class)));
    }
    if cfg.dims == 0 || cfg.classes < 2 {
        return Err(Error::Config("synthetic data needs dims >= 1 and classes >= 2".into()));
    }
    let (rows, labels) = match cfg.kind {
        SynthKind::Blobs => blobs(cfg.n_per_class, cfg.dims, cfg.classes, cfg.seed),
        SynthKind::XorRings => {
            if cfg.dims < 2 || cfg.classes != 2 {
                return Err(Error::Config("xor_rings needs dims >= 2 and 2 classes".into()));
            }
            xor_rings(cfg.n_per_class, cfg.dims, cfg.seed)
        }
        SynthKind::AdhocZz => {
            if cfg.classes != 2 {
                return Err(Error::Config("adhoc_zz is binary".into()));
            }
            adhoc_zz(cfg.n_per_class, cfg.dims, cfg.seed)?
        }
    };
    let names = (0..cfg.dims).map(|j| format!("f{j}")).collect();
    let mut ds = Dataset::new(Matrix::from_rows(&rows)?, labels, class_names(cfg.classes), names)?;
    ds.provenance = Provenance {
        source: format!("synth:{}:n{}:d{}:k{}:seed{}", cfg.kind, cfg.n_per_class, cfg.dims, cfg.classes, cfg.seed),
        transforms: Vec::new(),
    };
    Ok(ds)
}

/// Unit-σ Gaussian clusters whose centers are pairwise at least
/// [`BLOB_SEPARATION`] apart.
fn blobs(n: usize, d: usize, k: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = SimRng::new(seed);
    let half = BLOB_SEPARATION * (k as f64).max(2.0);
    let mut centers: Vec<Vec<f64>> = Vec::new();
    while centers.len() < k {
        let c: Vec<f64> = (0..d).map(|_| rng.range(-half, half)).collect();
        let far = centers.iter().all(|o| {
            o.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() >= BLOB_SEPARATION
        });
        if far {
            centers.push(c);
        }
    }
    let mut rows = Vec::with_capacity(n * k);
    let mut labels = Vec::with_capacity(n * k);
    for i in 0..n * k {
        let c = i % k;
        rows.push(centers[c].iter().map(|m| m + rng.normal()).collect());
        labels.push(c);
    }
    (rows, labels)
}

/// Quadrant parity in the first two coordinates; further coordinates are
/// uniform noise.
fn xor_rings(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = SimRng::new(seed);
    let mut rows = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    let mut counts = [0usize; 2];
    while counts[0] < n || counts[1] < n {
        let row: Vec<f64> = (0..d).map(|_| rng.range(-1.0, 1.0)).collect();
        if row[0].abs() < XOR_GAP || row[1].abs() < XOR_GAP {
            continue;
        }
        let c = usize::from((row[0] > 0.0) != (row[1] > 0.0));
        if counts[c] < n {
            counts[c] += 1;
            rows.push(row);
            labels.push(c);
        }
    }
    (rows, labels)
}

/// Points in `[0, π]^d` labeled by the sign of `k(x, a+) − k(x, a−)` under a
/// ZZ feature map, keeping only points with margin [`ADHOC_MARGIN`].
fn adhoc_zz(n: usize, d: usize, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let fm: FeatureMap = FeatureMapSpec::new(FeatureMapKind::ZZFeatureMap, d)
        .with_reps(ADHOC_REPS)
        .with_entanglement(Entanglement::Linear)
        .build()?;
    let mut rng = SimRng::new(seed);
    let anchors = Matrix::from_rows(&[
        (0..d).map(|_| rng.range(0.0, PI)).collect::<Vec<_>>(),
        (0..d).map(|_| rng.range(0.0, PI)).collect::<Vec<_>>(),
    ])?;
    let ex = Executor::exact();
    let mut rows = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    let mut counts = [0usize; 2];
    let mut attempts = 0usize;
    while counts[0] < n || counts[1] < n {
        let batch: Vec<Vec<f64>> = (0..64).map(|_| (0..d).map(|_| rng.range(0.0, PI)).collect()).collect();
        let k = quantum_kernel(&fm, &Matrix::from_rows(&batch)?, Some(&anchors), &ex)?;
        for (i, row) in batch.into_iter().enumerate() {
            let s = k[(i, 0)] - k[(i, 1)];
            let c = usize::from(s > 0.0);
            if s.abs() >= ADHOC_MARGIN && counts[c] < n {
                counts[c] += 1;
                rows.push(row);
                labels.push(c);
            }
        }
        attempts += 64;
        if attempts > 2000 * n {
            return Err(Error::Data("adhoc_zz: anchors give too few points with the required margin".into()));
        }
    }
    Ok((rows, labels))
}
