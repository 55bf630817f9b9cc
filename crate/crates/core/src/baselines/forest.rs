use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{mix, SimRng};

/// `1 − Σ p²` over class counts.
pub fn gini(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|&c| (c as f64 / n as f64).powi(2)).sum::<f64>()
}

fn argmax_lowest(counts: &[u64]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Defaults to `⌈√d⌉`.
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { n_trees: 100, max_depth: 12, min_samples_leaf: 2, features_per_split: None, seed: 0 }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.max_depth == 0 || self.min_samples_leaf == 0 || self.features_per_split == Some(0) {
            return Err(Error::InvalidArgument("forest settings must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { counts: Vec<u64> },
}

/// CART tree stored as a node array; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [usize],
    num_classes: usize,
    cfg: &'a ForestConfig,
    mtry: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<u64> {
        let mut c = vec![0u64; self.num_classes];
        idx.iter().for_each(|&i| c[self.y[i]] += 1);
        c
    }

    fn build(&mut self, idx: &mut [usize], depth: usize, rng: &mut SimRng) -> usize {
        let counts = self.counts(idx);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts: counts.clone() });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.cfg.max_depth || idx.len() < 2 * self.cfg.min_samples_leaf {
            return id;
        }
        let d = self.x.cols();
        let mut features: Vec<usize> = (0..d).collect();
        for k in 0..self.mtry.min(d) {
            let j = k + rng.below(d - k);
            features.swap(k, j);
        }
        let parent = gini(&counts) * idx.len() as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let leaf = self.cfg.min_samples_leaf;
        for &f in &features[..self.mtry.min(d)] {
            idx.sort_by(|&a, &b| self.x[(a, f)].total_cmp(&self.x[(b, f)]).then(a.cmp(&b)));
            let mut left = vec![0u64; self.num_classes];
            let mut right = counts.clone();
            for s in 0..idx.len() - 1 {
                let c = self.y[idx[s]];
                left[c] += 1;
                right[c] -= 1;
                let (lo, hi) = (self.x[(idx[s], f)], self.x[(idx[s + 1], f)]);
                if s + 1 < leaf || idx.len() - s - 1 < leaf || lo == hi {
                    continue;
                }
                let score = gini(&left) * (s + 1) as f64 + gini(&right) * (idx.len() - s - 1) as f64;
                if best.is_none_or(|(b, _, _)| score < b) {
                    best = Some((score, f, 0.5 * (lo + hi)));
                }
            }
        }
        let Some((score, feature, threshold)) = best else { return id };
        if score >= parent - 1e-12 {
            return id;
        }
        let mut l: Vec<usize> = idx.iter().copied().filter(|&i| self.x[(i, feature)] <= threshold).collect();
        let mut r: Vec<usize> = idx.iter().copied().filter(|&i| self.x[(i, feature)] > threshold).collect();
        let left = self.build(&mut l, depth + 1, rng);
        let right = self.build(&mut r, depth + 1, rng);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }
}

impl DecisionTree {
    pub fn leaf_counts(&self, row: &[f64]) -> &[u64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split { feature, threshold, left, right } => at = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { counts } => return counts,
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax_lowest(self.leaf_counts(row))
    }

    pub fn validate(&self, num_features: usize, num_classes: usize) -> Result<()> {
        for n in &self.nodes {
            match n {
                Node::Split { feature, threshold, left, right } => {
                    if *feature >= num_features || !threshold.is_finite() || *left >= self.nodes.len() || *right >= self.nodes.len() {
                        return Err(Error::InvalidArgument("malformed tree node".into()));
                    }
                }
                Node::Leaf { counts } if counts.len() != num_classes => {
                    return Err(Error::InvalidArgument("leaf class count mismatch".into()));
                }
                Node::Leaf { .. } => {}
            }
        }
        Ok(())
    }
}

/// Bagged CART trees with random feature subsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub config: ForestConfig,
    pub num_features: usize,
    pub num_classes: usize,
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    pub fn fit(x: &Matrix, y: &[usize], num_classes: usize, config: &ForestConfig) -> Result<Self> {
        config.validate()?;
        if x.rows() < 2 || x.cols() == 0 {
            return Err(Error::EmptyData);
        }
        if y.len() != x.rows() {
            return Err(Error::Shape(alloc::format!("{} rows but {} labels", x.rows(), y.len())));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= num_classes) {
            return Err(Error::InvalidArgument(alloc::format!("class {bad} outside {num_classes} classes")));
        }
        if x.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let d = x.cols();
        let mtry = config.features_per_split.unwrap_or_else(|| (1..=d).find(|k| k * k >= d).unwrap_or(d));
        let trees = (0..config.n_trees)
            .map(|t| {
                let mut rng = SimRng::new(mix(config.seed, t as u64));
                let mut idx: Vec<usize> = (0..x.rows()).map(|_| rng.below(x.rows())).collect();
                let mut b = Builder { x, y, num_classes, cfg: config, mtry, nodes: Vec::new() };
                b.build(&mut idx, 0, &mut rng);
                DecisionTree { nodes: b.nodes }
            })
            .collect();
        Ok(Self { config: config.clone(), num_features: d, num_classes, trees })
    }

    /// Vote fractions per class for each row.
    pub fn vote_fractions(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        if x.cols() != self.num_features {
            return Err(Error::Shape(alloc::format!("{} features, forest expects {}", x.cols(), self.num_features)));
        }
        Ok(x.iter_rows()
            .map(|r| {
                let mut votes = vec![0.0; self.num_classes];
                self.trees.iter().for_each(|t| votes[t.predict_row(r)] += 1.0);
                votes.iter().map(|v| v / self.trees.len() as f64).collect()
            })
            .collect())
    }

    /// Majority vote; ties go to the lowest class.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self
            .vote_fractions(x)?
            .into_iter()
            .map(|v| {
                let mut best = 0;
                for c in 1..v.len() {
                    if v[c] > v[best] {
                        best = c;
                    }
                }
                best
            })
            .collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.trees.iter().try_for_each(|t| t.validate(self.num_features, self.num_classes))
    }
}
