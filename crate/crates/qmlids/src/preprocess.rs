//! Train-fitted preprocessing: median imputation, min-max scaling to
//! `[0, π]`, dimensionality reduction, balancing and stratified splitting.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use qmlids_core::linalg::Matrix;
use qmlids_core::rng::SimRng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    #[default]
    Binary,
    Multiclass,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reducer {
    #[default]
    Pca,
    TopVariance,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Balance {
    #[default]
    None,
    Downsample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub label_column: String,
    pub mode: LabelMode,
    /// Raw labels counted as attacks in binary mode. Empty means every label
    /// other than `benign_class`.
    pub positive_classes: Vec<String>,
    pub benign_class: String,
    pub categorical_columns: Vec<String>,
    pub drop_columns: Vec<String>,
    pub reducer: Reducer,
    pub target_dim: usize,
    pub balance: Balance,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            label_column: "label".into(),
            mode: LabelMode::Binary,
            positive_classes: Vec::new(),
            benign_class: "benign".into(),
            categorical_columns: Vec::new(),
            drop_columns: Vec::new(),
            reducer: Reducer::Pca,
            target_dim: 4,
            balance: Balance::None,
            train_fraction: 0.7,
            seed: 0,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_dim == 0 {
            return Err(Error::Config("preprocess.target_dim must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!("preprocess.train_fraction {} not in (0, 1)", self.train_fraction)));
        }
        Ok(())
    }
}

/// Per-column medians ignoring NaN; an all-missing column gets 0.
pub fn medians(x: &Matrix) -> Vec<f64> {
    (0..x.cols())
        .map(|j| {
            let mut v: Vec<f64> = x.column(j).into_iter().filter(|v| !v.is_nan()).collect();
            if v.is_empty() {
                return 0.0;
            }
            v.sort_by(f64::total_cmp);
            let m = v.len() / 2;
            if v.len() % 2 == 1 {
                v[m]
            } else {
                0.5 * (v[m - 1] + v[m])
            }
        })
        .collect()
}

pub fn impute(x: &mut Matrix, medians: &[f64]) {
    for i in 0..x.rows() {
        for (v, &m) in x.row_mut(i).iter_mut().zip(medians) {
            if v.is_nan() {
                *v = m;
            }
        }
    }
}

/// Column extrema from the fitting set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl MinMax {
    pub fn fit(x: &Matrix) -> Self {
        let lo = (0..x.cols()).map(|j| x.column(j).into_iter().fold(f64::INFINITY, f64::min)).collect();
        let hi = (0..x.cols()).map(|j| x.column(j).into_iter().fold(f64::NEG_INFINITY, f64::max)).collect();
        Self { lo, hi }
    }

    /// Maps into `[0, π]`, clipping values outside the fitted range. A
    /// constant column maps to 0.
    pub fn apply(&self, x: &mut Matrix) {
        for i in 0..x.rows() {
            for (j, v) in x.row_mut(i).iter_mut().enumerate() {
                let span = self.hi[j] - self.lo[j];
                *v = if span > 0.0 { (PI * (*v - self.lo[j]) / span).clamp(0.0, PI) } else { 0.0 };
            }
        }
    }
}

/// Principal components as rows of `components`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

impl Pca {
    /// Eigendecomposition of the sample covariance. Each component's largest
    /// magnitude loading is made positive.
    pub fn fit(x: &Matrix, k: usize) -> Result<Self> {
        let (n, d) = (x.rows(), x.cols());
        if k > d {
            return Err(Error::Data(format!("target_dim {k} exceeds {d} features")));
        }
        if n < 2 {
            return Err(Error::Data("PCA needs at least two rows".into()));
        }
        let mean: Vec<f64> = (0..d).map(|j| x.column(j).iter().sum::<f64>() / n as f64).collect();
        let centered = DMatrix::from_fn(n, d, |i, j| x.row(i)[j] - mean[j]);
        let cov = centered.transpose() * &centered / (n - 1) as f64;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let mut components = Vec::with_capacity(k);
        let mut explained_variance = Vec::with_capacity(k);
        for &c in order.iter().take(k) {
            let mut v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |m, a| if a.abs() > m.abs() { a } else { m });
            if lead < 0.0 {
                v.iter_mut().for_each(|a| *a = -*a);
            }
            components.push(v);
            explained_variance.push(eig.eigenvalues[c].max(0.0));
        }
        Ok(Self { mean, components, explained_variance })
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        let k = self.components.len();
        let mut out = Matrix::zeros(x.rows(), k);
        for i in 0..x.rows() {
            let row = x.row(i);
            for (c, comp) in self.components.iter().enumerate() {
                out[(i, c)] = comp.iter().zip(row).zip(&self.mean).map(|((w, v), m)| w * (v - m)).sum();
            }
        }
        Ok(out)
    }

    pub fn inverse_transform(&self, z: &Matrix) -> Matrix {
        let d = self.mean.len();
        let mut out = Matrix::zeros(z.rows(), d);
        for i in 0..z.rows() {
            for j in 0..d {
                out[(i, j)] = self.mean[j] + self.components.iter().zip(z.row(i)).map(|(c, zc)| c[j] * zc).sum::<f64>();
            }
        }
        out
    }
}

/// Indices of the `k` highest-variance columns, in column order. Ties keep
/// the lower index.
pub fn top_variance(x: &Matrix, k: usize) -> Result<Vec<usize>> {
    if k > x.cols() {
        return Err(Error::Data(format!("target_dim {k} exceeds {} features", x.cols())));
    }
    let n = x.rows() as f64;
    let var: Vec<f64> = (0..x.cols())
        .map(|j| {
            let col = x.column(j);
            let m = col.iter().sum::<f64>() / n;
            col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n
        })
        .collect();
    let mut order: Vec<usize> = (0..x.cols()).collect();
    order.sort_by(|&a, &b| var[b].total_cmp(&var[a]).then(a.cmp(&b)));
    let mut keep: Vec<usize> = order.into_iter().take(k).collect();
    keep.sort_unstable();
    Ok(keep)
}

/// Row indices keeping `min class count` random rows of every class, sorted.
pub fn downsample(labels: &[usize], num_classes: usize, seed: u64) -> Vec<usize> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    labels.iter().enumerate().for_each(|(i, &c)| by_class[c].push(i));
    let target = by_class.iter().map(Vec::len).filter(|&n| n > 0).min().unwrap_or(0);
    let rng = SimRng::new(seed);
    let mut keep = Vec::new();
    for (c, mut idx) in by_class.into_iter().enumerate() {
        rng.split(c as u64).shuffle(&mut idx);
        keep.extend(idx.into_iter().take(target));
    }
    keep.sort_unstable();
    keep
}

/// Per class, `round(fraction * n_c)` rows go to train (at least one row on
/// each side). Both index lists are sorted.
pub fn stratified_split(labels: &[usize], num_classes: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    labels.iter().enumerate().for_each(|(i, &c)| by_class[c].push(i));
    let rng = SimRng::new(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (c, mut idx) in by_class.into_iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 2 {
            return Err(Error::Data(format!("class {c} has {} sample; stratification needs 2", idx.len())));
        }
        rng.split(c as u64).shuffle(&mut idx);
        let k = ((fraction * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Everything fitted on the training split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fitted {
    pub medians: Vec<f64>,
    pub scale: MinMax,
    pub reducer: Option<FittedReducer>,
    /// Second scaling after PCA, which leaves `[0, π]`.
    pub rescale: Option<MinMax>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FittedReducer {
    Pca(Pca),
    TopVariance(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub fitted: Fitted,
}

impl Fitted {
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        let mut x = ds.features.clone();
        impute(&mut x, &self.medians);
        self.scale.apply(&mut x);
        let (mut x, names) = match &self.reducer {
            None => (x, ds.feature_names.clone()),
            Some(FittedReducer::Pca(p)) => (p.transform(&x)?, (0..p.components.len()).map(|c| format!("pc{c}")).collect()),
            Some(FittedReducer::TopVariance(keep)) => {
                let rows: Vec<Vec<f64>> = x.iter_rows().map(|r| keep.iter().map(|&j| r[j]).collect()).collect();
                let m = if rows.is_empty() { Matrix::zeros(0, keep.len()) } else { Matrix::from_rows(&rows)? };
                (m, keep.iter().map(|&j| ds.feature_names[j].clone()).collect())
            }
        };
        if let Some(r) = &self.rescale {
            r.apply(&mut x);
        }
        ds.with_features(x, names)
    }
}

/// Balances, splits, then fits every statistic on the training rows only.
/// Reduction runs only when there are more features than `target_dim`.
pub fn preprocess(mut ds: Dataset, config: &PreprocessConfig) -> Result<Split> {
    config.validate()?;
    ds.validate()?;
    if config.target_dim > ds.num_features() {
        return Err(Error::Data(format!(
            "target_dim {} exceeds {} features",
            config.target_dim,
            ds.num_features()
        )));
    }
    if config.balance == Balance::Downsample {
        let keep = downsample(&ds.labels, ds.num_classes(), config.seed);
        ds = ds.subset(&keep);
        ds.log(format!("balance: downsampled to {} rows", ds.len()));
    }
    let (tr, te) = stratified_split(&ds.labels, ds.num_classes(), config.train_fraction, config.seed)?;
    ds.log(format!(
        "split: stratified fraction {} seed {} -> {} train, {} test",
        config.train_fraction,
        config.seed,
        tr.len(),
        te.len()
    ));
    let train_raw = ds.subset(&tr);
    let n = tr.len();

    let mut x = train_raw.features.clone();
    let med = medians(&x);
    impute(&mut x, &med);
    let scale = MinMax::fit(&x);
    scale.apply(&mut x);
    let mut log = vec![
        format!("impute: medians fitted on {n} train rows"),
        format!("scale: min-max to [0, pi] fitted on {n} train rows, test clipped"),
    ];
    let d = ds.num_features();
    let mut fitted = Fitted { medians: med, scale, reducer: None, rescale: None };
    if d > config.target_dim {
        let k = config.target_dim;
        match config.reducer {
            Reducer::Pca => {
                let pca = Pca::fit(&x, k)?;
                fitted.rescale = Some(MinMax::fit(&pca.transform(&x)?));
                fitted.reducer = Some(FittedReducer::Pca(pca));
                log.push(format!("reduce: pca {d} -> {k} fitted on {n} train rows"));
                log.push(format!("rescale: min-max to [0, pi] fitted on {n} train rows"));
            }
            Reducer::TopVariance => {
                fitted.reducer = Some(FittedReducer::TopVariance(top_variance(&x, k)?));
                log.push(format!("reduce: top_variance {d} -> {k} fitted on {n} train rows"));
            }
        }
    }
    let mut train = fitted.apply(&train_raw)?;
    let mut test = fitted.apply(&ds.subset(&te))?;
    for entry in log {
        train.log(entry.clone());
        test.log(entry);
    }
    Ok(Split { train, test, fitted })
}
