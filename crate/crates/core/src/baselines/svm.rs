use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::models::{check_binary, svm_fit_with, BinaryClassifier, SmoConfig, SvmDual};
use crate::sim::Executor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalKernel {
    Linear,
    /// `exp(−γ‖a − b‖²)`; `γ` defaults to `1/d`.
    Rbf { gamma: Option<f64> },
}

impl ClassicalKernel {
    fn resolved(self, d: usize) -> Result<Self> {
        match self {
            Self::Rbf { gamma } => {
                let g = gamma.unwrap_or(1.0 / d.max(1) as f64);
                if !(g.is_finite() && g > 0.0) {
                    return Err(Error::InvalidArgument("RBF gamma must be positive".into()));
                }
                Ok(Self::Rbf { gamma: Some(g) })
            }
            k => Ok(k),
        }
    }

    fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Self::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Self::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                libm::exp(-gamma.unwrap_or(1.0 / a.len().max(1) as f64) * d2)
            }
        }
    }
}

/// Gram matrix between rows of `xa` and `xb`.
pub fn kernel_matrix(kernel: ClassicalKernel, xa: &Matrix, xb: &Matrix) -> Result<Matrix> {
    if xa.cols() != xb.cols() {
        return Err(Error::Shape(alloc::format!("{} vs {} feature columns", xa.cols(), xb.cols())));
    }
    let k = kernel.resolved(xa.cols())?;
    let data = xa.iter_rows().flat_map(|a| xb.iter_rows().map(move |b| k.eval(a, b))).collect();
    Matrix::from_vec(xa.rows(), xb.rows(), data)
}

/// RBF-kernel SVM through the shared SMO solver.
pub fn rbf_svm_fit(x: &Matrix, y: &[f64], c: f64, gamma: Option<f64>) -> Result<SvmDual> {
    check_binary(x, y)?;
    let k = kernel_matrix(ClassicalKernel::Rbf { gamma }, x, x)?;
    svm_fit_with(&k, y, c, &SmoConfig::default())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSvm {
    pub kernel: ClassicalKernel,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_x: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<SvmDual>,
}

impl ClassicalSvm {
    pub fn new(kernel: ClassicalKernel, c: f64) -> Self {
        Self { kernel, c, train_x: None, dual: None }
    }

    pub fn validate(&self) -> Result<()> {
        if let (Some(x), Some(d)) = (&self.train_x, &self.dual) {
            d.validate()?;
            if x.rows() != d.n_train {
                return Err(Error::Shape("stored training data does not match the model".into()));
            }
        }
        Ok(())
    }
}

impl BinaryClassifier for ClassicalSvm {
    fn fit(&mut self, x: &Matrix, y: &[f64], _: &Executor) -> Result<()> {
        check_binary(x, y)?;
        self.kernel = self.kernel.resolved(x.cols())?;
        let k = kernel_matrix(self.kernel, x, x)?;
        self.dual = Some(svm_fit_with(&k, y, self.c, &SmoConfig::default())?);
        self.train_x = Some(x.clone());
        Ok(())
    }

    fn decision_function(&self, x: &Matrix, _: &Executor) -> Result<Vec<f64>> {
        let (train, dual) = match (&self.train_x, &self.dual) {
            (Some(t), Some(d)) => (t, d),
            _ => return Err(Error::Untrained),
        };
        dual.decision(&kernel_matrix(self.kernel, x, train)?)
    }
}
