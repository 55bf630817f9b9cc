//! Classical comparison models: random forest and kernel SVMs.

mod forest;
mod svm;

pub use forest::{gini, DecisionTree, ForestConfig, Node, RandomForest};
pub use svm::{kernel_matrix, rbf_svm_fit, ClassicalKernel, ClassicalSvm};
