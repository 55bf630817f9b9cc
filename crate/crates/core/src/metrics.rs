//! Classification metrics.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub per_class: Vec<ClassMetrics>,
    pub macro_f1: f64,
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
}

/// Ratio with the convention `0/0 = 0`.
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn evaluate(y_true: &[usize], y_pred: &[usize], num_classes: usize) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape(alloc::format!("{} labels vs {} predictions", y_true.len(), y_pred.len())));
    }
    if y_true.is_empty() {
        return Err(Error::EmptyData);
    }
    if let Some(&bad) = y_true.iter().chain(y_pred).find(|&&c| c >= num_classes) {
        return Err(Error::InvalidArgument(alloc::format!("class {bad} outside {num_classes} classes")));
    }
    let mut confusion = vec![vec![0u64; num_classes]; num_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        confusion[t][p] += 1;
    }
    let per_class: Vec<ClassMetrics> = (0..num_classes)
        .map(|c| {
            let tp = confusion[c][c];
            let support: u64 = confusion[c].iter().sum();
            let predicted: u64 = confusion.iter().map(|row| row[c]).sum();
            let (precision, recall) = (ratio(tp, predicted), ratio(tp, support));
            ClassMetrics { precision, recall, f1: f1_score(precision, recall), support }
        })
        .collect();
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / num_classes as f64;
    let correct: u64 = (0..num_classes).map(|c| confusion[c][c]).sum();
    Ok(Metrics { per_class, macro_f1, accuracy: ratio(correct, y_true.len() as u64), confusion })
}

/// F1 of the positive class for ±1 labels.
pub fn binary_f1(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    let to_class = |v: &[f64]| -> Vec<usize> { v.iter().map(|&l| usize::from(l > 0.0)).collect() };
    Ok(evaluate(&to_class(y_true), &to_class(y_pred), 2)?.per_class[1].f1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictor() {
        let y = [0, 1, 2, 1, 0];
        let m = evaluate(&y, &y, 3).unwrap();
        assert_eq!(m.macro_f1, 1.0);
        assert_eq!(m.confusion, [[2, 0, 0], [0, 2, 0], [0, 0, 1]]);
    }

    #[test]
    fn all_benign_gives_zero_attack_f1() {
        let t = [1.0, -1.0, 1.0, -1.0];
        assert_eq!(binary_f1(&t, &[-1.0; 4]).unwrap(), 0.0);
    }

    #[test]
    fn identities() {
        let t = [0, 0, 1, 1, 1, 2, 2, 0];
        let p = [0, 1, 1, 2, 1, 2, 0, 0];
        let m = evaluate(&t, &p, 3).unwrap();
        let mean = m.per_class.iter().map(|c| c.f1).sum::<f64>() / 3.0;
        assert!((m.macro_f1 - mean).abs() < 1e-15);
        assert_eq!(m.confusion.iter().flatten().sum::<u64>(), 8);
        for (c, row) in m.confusion.iter().enumerate() {
            assert_eq!(row.iter().sum::<u64>(), m.per_class[c].support);
        }
        for c in &m.per_class {
            assert!((c.f1 - 2.0 * c.precision * c.recall / (c.precision + c.recall)).abs() < 1e-15);
        }
    }
}
