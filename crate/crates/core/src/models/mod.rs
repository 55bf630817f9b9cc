//! Quantum classifiers: variational classifier, quantum-kernel SVM and QCNN,
//! plus one-vs-rest multiclass wrapping.

mod kernel;
mod ovr;
mod qcnn;
mod svm;
mod variational;
mod vqc;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::sim::Executor;

pub use kernel::{quantum_kernel, QuantumKernel};
pub use ovr::{argmax_scores, OneVsRest};
pub use qcnn::{Qcnn, QcnnConfig, QcnnLayer};
pub use svm::{svm_fit, svm_fit_with, Qsvm, QsvmConfig, SmoConfig, SvmDual};
pub use vqc::{Vqc, VqcConfig};
pub use qcnn::{qcnn_plan, QCNN_MAX_QUBITS, QCNN_MIN_QUBITS};

/// Binary model with real-valued scores; positive scores mean `+1`.
pub trait BinaryClassifier {
    fn fit(&mut self, x: &Matrix, y: &[f64], executor: &Executor) -> Result<()>;

    fn decision_function(&self, x: &Matrix, executor: &Executor) -> Result<Vec<f64>>;

    /// Labels in {−1, +1}; a zero score maps to `+1`.
    fn predict(&self, x: &Matrix, executor: &Executor) -> Result<Vec<f64>> {
        Ok(self.decision_function(x, executor)?.into_iter().map(sign).collect())
    }
}

/// `+1` for non-negative values, `−1` otherwise.
pub fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Checks shapes and that every label is exactly ±1.
pub fn check_binary(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.rows() == 0 {
        return Err(Error::EmptyData);
    }
    if x.rows() != y.len() {
        return Err(Error::Shape(alloc::format!("{} rows but {} labels", x.rows(), y.len())));
    }
    if let Some(&bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidLabel(bad));
    }
    Ok(())
}
