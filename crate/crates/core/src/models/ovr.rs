use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::BinaryClassifier;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::sim::Executor;

/// One binary model per class (class = +1, rest = −1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneVsRest<M> {
    pub models: Vec<M>,
}

/// Row-wise argmax over per-class scores; ties go to the lowest class.
pub fn argmax_scores(scores: &[Vec<f64>], rows: usize) -> Vec<usize> {
    (0..rows)
        .map(|r| {
            let mut best = 0;
            for c in 1..scores.len() {
                if scores[c][r] > scores[best][r] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

impl<M: BinaryClassifier + Clone> OneVsRest<M> {
    pub fn fit(template: &M, x: &Matrix, labels: &[usize], num_classes: usize, ex: &Executor) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidArgument("one-vs-rest needs at least two classes".into()));
        }
        if labels.len() != x.rows() {
            return Err(Error::Shape(alloc::format!("{} rows but {} labels", x.rows(), labels.len())));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::InvalidArgument(alloc::format!("label {bad} outside {num_classes} classes")));
        }
        let mut models = Vec::with_capacity(num_classes);
        for class in 0..num_classes {
            if !labels.contains(&class) {
                return Err(Error::MissingClass(class));
            }
            let y: Vec<f64> = labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
            let mut m = template.clone();
            m.fit(x, &y, ex)?;
            models.push(m);
        }
        Ok(Self { models })
    }

    /// Per-class score columns, indexed `[class][row]`.
    pub fn scores(&self, x: &Matrix, ex: &Executor) -> Result<Vec<Vec<f64>>> {
        self.models.iter().map(|m| m.decision_function(x, ex)).collect()
    }

    pub fn predict(&self, x: &Matrix, ex: &Executor) -> Result<Vec<usize>> {
        Ok(argmax_scores(&self.scores(x, ex)?, x.rows()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[derive(Clone)]
    struct Threshold {
        dim: usize,
        cut: f64,
    }

    impl BinaryClassifier for Threshold {
        fn fit(&mut self, x: &Matrix, y: &[f64], _: &Executor) -> Result<()> {
            let pos: Vec<f64> = x.iter_rows().zip(y).filter(|(_, &l)| l > 0.0).map(|(r, _)| r[self.dim]).collect();
            self.cut = pos.iter().sum::<f64>() / pos.len() as f64;
            Ok(())
        }

        fn decision_function(&self, x: &Matrix, _: &Executor) -> Result<Vec<f64>> {
            Ok(x.iter_rows().map(|r| -(r[self.dim] - self.cut).abs()).collect())
        }
    }

    #[test]
    fn argmax_with_ties() {
        assert_eq!(argmax_scores(&[vec![0.5, 0.1], vec![0.5, 0.2], vec![0.1, 0.2]], 2), [0, 1]);
    }

    #[test]
    fn nearest_class_mean() {
        let x = Matrix::from_rows(&[[0.0], [0.1], [1.0], [1.1], [2.0], [2.1]]).unwrap();
        let labels = [0, 0, 1, 1, 2, 2];
        let ovr = OneVsRest::fit(&Threshold { dim: 0, cut: 0.0 }, &x, &labels, 3, &Executor::exact()).unwrap();
        assert_eq!(ovr.predict(&x, &Executor::exact()).unwrap(), labels);
    }

    #[test]
    fn missing_class() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let r = OneVsRest::fit(&Threshold { dim: 0, cut: 0.0 }, &x, &[0, 2], 3, &Executor::exact());
        assert_eq!(r.err(), Some(Error::MissingClass(1)));
    }
}
