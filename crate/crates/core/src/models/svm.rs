use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::kernel::QuantumKernel;
use super::{check_binary, BinaryClassifier};
use crate::circuitlib::{FeatureMapKind, FeatureMapSpec};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::sim::Executor;

/// Solver knobs for sequential minimal optimization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoConfig {
    /// Stop once the maximal KKT violation drops below this.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for SmoConfig {
    fn default() -> Self {
        Self { tolerance: 1e-3, max_iters: 1_000_000 }
    }
}

const TAU: f64 = 1e-12;
const JITTER: f64 = 1e-8;

/// Solution of the kernel SVM dual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmDual {
    /// Training indices with non-zero `α`.
    pub support: Vec<usize>,
    /// `α_i y_i` for each support index.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub n_train: usize,
}

impl SvmDual {
    pub fn validate(&self) -> Result<()> {
        if self.support.len() != self.coef.len() {
            return Err(Error::Shape("support and coefficient lengths differ".into()));
        }
        if self.support.iter().any(|&i| i >= self.n_train) {
            return Err(Error::Shape("support index beyond the training set".into()));
        }
        if self.coef.iter().any(|a| a.abs() > self.c * (1.0 + 1e-9)) {
            return Err(Error::InvalidArgument("dual coefficient exceeds C".into()));
        }
        if self.coef.iter().sum::<f64>().abs() > 1e-6 {
            return Err(Error::InvalidArgument("dual coefficients do not sum to zero".into()));
        }
        Ok(())
    }

    /// `Σ α_i y_i K(x, x_i) + b` for each row of `k_test` (test × train).
    pub fn decision(&self, k_test: &Matrix) -> Result<Vec<f64>> {
        if k_test.cols() != self.n_train {
            return Err(Error::Shape(alloc::format!("{} kernel columns for {} training rows", k_test.cols(), self.n_train)));
        }
        Ok(k_test
            .iter_rows()
            .map(|r| self.support.iter().zip(&self.coef).map(|(&i, a)| a * r[i]).sum::<f64>() + self.bias)
            .collect())
    }

    /// ±1 labels; ties go to `+1`.
    pub fn predict(&self, k_test: &Matrix) -> Result<Vec<f64>> {
        Ok(self.decision(k_test)?.into_iter().map(super::sign).collect())
    }
}

/// Adds diagonal jitter until the Gram matrix admits a Cholesky factor.
fn repair_psd(k: &Matrix) -> Matrix {
    let n = k.rows();
    let shifted = |eps: f64| {
        let mut m = k.clone();
        (0..n).for_each(|i| m[(i, i)] += eps);
        m
    };
    if shifted(JITTER).cholesky().is_some() {
        return k.clone();
    }
    let mut eps = JITTER;
    loop {
        eps *= 10.0;
        let m = shifted(eps);
        if m.cholesky().is_some() || eps > 1e3 {
            log::warn!("kernel matrix is not positive semidefinite; added {eps:e} to the diagonal");
            return m;
        }
    }
}

pub fn svm_fit(k: &Matrix, y: &[f64], c: f64) -> Result<SvmDual> {
    svm_fit_with(k, y, c, &SmoConfig::default())
}

/// Kernel SVM dual by SMO with maximal-violating-pair selection. Bias is the
/// average over free support vectors, or the midpoint of the feasible
/// interval when there are none. A single-class `y` yields `b = y`.
pub fn svm_fit_with(k: &Matrix, y: &[f64], c: f64, cfg: &SmoConfig) -> Result<SvmDual> {
    let n = y.len();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    if k.rows() != n || k.cols() != n {
        return Err(Error::Shape(alloc::format!("{}×{} Gram matrix for {n} labels", k.rows(), k.cols())));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument("C must be positive".into()));
    }
    if let Some(&bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidLabel(bad));
    }
    if k.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if y.iter().all(|&v| v == y[0]) {
        return Ok(SvmDual { support: Vec::new(), coef: Vec::new(), bias: y[0], c, n_train: n });
    }
    let k = repair_psd(k);
    let q = |i: usize, j: usize| y[i] * y[j] * k[(i, j)];
    let mut alpha = vec![0.0; n];
    let mut g = vec![-1.0; n];
    let up = |a: f64, yi: f64| if yi > 0.0 { a < c } else { a > 0.0 };
    let low = |a: f64, yi: f64| if yi > 0.0 { a > 0.0 } else { a < c };
    for _ in 0..cfg.max_iters {
        let (mut i, mut gmax) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut gmin) = (usize::MAX, f64::INFINITY);
        for t in 0..n {
            let v = -y[t] * g[t];
            if up(alpha[t], y[t]) && v > gmax {
                (i, gmax) = (t, v);
            }
            if low(alpha[t], y[t]) && v < gmin {
                (j, gmin) = (t, v);
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < cfg.tolerance {
            break;
        }
        let (ai, aj) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (k[(i, i)] + k[(j, j)] + 2.0 * q(i, j)).max(TAU);
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (k[(i, i)] + k[(j, j)] - 2.0 * q(i, j)).max(TAU);
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for (t, gt) in g.iter_mut().enumerate() {
            *gt += q(t, i) * di + q(t, j) * dj;
        }
    }
    let (mut ub, mut lb, mut free_sum, mut free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * g[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { 0.5 * (ub + lb) };
    let support: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let coef = support.iter().map(|&t| alpha[t] * y[t]).collect();
    Ok(SvmDual { support, coef, bias: -rho, c, n_train: n })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QsvmConfig {
    pub feature_map: FeatureMapSpec,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub smo: SmoConfig,
}

fn default_c() -> f64 {
    1.0
}

impl QsvmConfig {
    pub fn new(num_qubits: usize) -> Self {
        Self { feature_map: FeatureMapSpec::new(FeatureMapKind::ZZFeatureMap, num_qubits), c: 1.0, smo: SmoConfig::default() }
    }
}

/// Kernel SVM on a quantum fidelity kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Qsvm {
    pub config: QsvmConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_x: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<SvmDual>,
}

impl Qsvm {
    pub fn new(config: QsvmConfig) -> Self {
        Self { config, train_x: None, dual: None }
    }

    fn kernel(&self) -> Result<QuantumKernel> {
        Ok(QuantumKernel::new(self.config.feature_map.build()?))
    }

    pub fn validate(&self) -> Result<()> {
        self.config.feature_map.validate()?;
        if let (Some(x), Some(d)) = (&self.train_x, &self.dual) {
            d.validate()?;
            if x.rows() != d.n_train || x.cols() != self.config.feature_map.num_features() {
                return Err(Error::Shape("stored training data does not match the model".into()));
            }
        }
        Ok(())
    }

    /// Fits from a precomputed training Gram matrix.
    pub fn fit_gram(&mut self, x: &Matrix, gram: &Matrix, y: &[f64]) -> Result<()> {
        check_binary(x, y)?;
        self.dual = Some(svm_fit_with(gram, y, self.config.c, &self.config.smo)?);
        self.train_x = Some(x.clone());
        Ok(())
    }

    /// Test × train Gram matrix against the stored training rows.
    pub fn test_gram(&self, x: &Matrix, ex: &Executor) -> Result<Matrix> {
        let train = self.train_x.as_ref().ok_or(Error::Untrained)?;
        self.kernel()?.matrix(x, Some(train), ex, 1 << 50)
    }
}

impl BinaryClassifier for Qsvm {
    fn fit(&mut self, x: &Matrix, y: &[f64], ex: &Executor) -> Result<()> {
        check_binary(x, y)?;
        let gram = self.kernel()?.matrix(x, None, ex, 0)?;
        self.fit_gram(x, &gram, y)
    }

    fn decision_function(&self, x: &Matrix, ex: &Executor) -> Result<Vec<f64>> {
        let dual = self.dual.as_ref().ok_or(Error::Untrained)?;
        dual.decision(&self.test_gram(x, ex)?)
    }
}
