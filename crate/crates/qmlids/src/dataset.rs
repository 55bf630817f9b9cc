//! In-memory labeled data set and its CSV form.

use std::path::Path;

use qmlids_core::linalg::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the label column in files this crate writes.
pub const LABEL_COLUMN: &str = "label";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    /// Append-only.
    pub transforms: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, class_names: Vec<String>, feature_names: Vec<String>) -> Result<Self> {
        let ds = Self { features, labels, class_names, feature_names, provenance: Provenance::default() };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.rows() != self.labels.len() {
            return Err(Error::Data(format!("{} rows but {} labels", self.features.rows(), self.labels.len())));
        }
        if self.features.cols() != self.feature_names.len() {
            return Err(Error::Data(format!(
                "{} columns but {} feature names",
                self.features.cols(),
                self.feature_names.len()
            )));
        }
        if let Some(&c) = self.labels.iter().find(|&&c| c >= self.class_names.len()) {
            return Err(Error::Data(format!("label {c} outside {} classes", self.class_names.len())));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        self.labels.iter().for_each(|&c| counts[c] += 1);
        counts
    }

    pub fn log(&mut self, entry: impl Into<String>) {
        self.provenance.transforms.push(entry.into());
    }

    /// Rows `idx` in the given order; metadata is copied.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn with_features(&self, features: Matrix, feature_names: Vec<String>) -> Result<Self> {
        let ds = Self { features, feature_names, ..self.clone() };
        ds.validate()?;
        Ok(ds)
    }

    /// Labels as ±1 with class 0 negative.
    pub fn signed_labels(&self) -> Vec<f64> {
        self.labels.iter().map(|&c| if c == 0 { -1.0 } else { 1.0 }).collect()
    }

    /// Feature columns followed by a `label` column holding class names.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let mut header = self.feature_names.clone();
        header.push(LABEL_COLUMN.into());
        w.write_record(&header)?;
        for (row, &label) in self.features.iter_rows().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(self.class_names[label].clone());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads a file written by [`Dataset::write_csv`]. Class indices follow
    /// `class_names`.
    pub fn read_csv(path: &Path, class_names: &[String]) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.last().map(String::as_str) != Some(LABEL_COLUMN) {
            return Err(Error::Data(format!("{}: last column must be `{LABEL_COLUMN}`", path.display())));
        }
        let d = header.len() - 1;
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            for v in rec.iter().take(d) {
                data.push(v.trim().parse::<f64>().map_err(|_| {
                    Error::Data(format!("{}: row {}: bad number `{v}`", path.display(), line + 1))
                })?);
            }
            let name = rec.get(d).unwrap_or_default();
            let c = class_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Data(format!("{}: unknown class `{name}`", path.display())))?;
            labels.push(c);
        }
        let rows = labels.len();
        let mut ds = Self::new(Matrix::from_vec(rows, d, data)?, labels, class_names.to_vec(), header[..d].to_vec())?;
        ds.provenance.source = path.display().to_string();
        Ok(ds)
    }
}
