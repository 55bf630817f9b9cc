//! Header-driven CSV ingestion with one-hot encoding of categorical columns.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use qmlids_core::linalg::Matrix;

use crate::dataset::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::preprocess::{LabelMode, PreprocessConfig};

const MISSING: [&str; 5] = ["", "?", "na", "nan", "null"];

enum Cell {
    Value(f64),
    Missing,
    Bad,
}

fn parse_cell(raw: &str) -> Cell {
    let s = raw.trim();
    if MISSING.contains(&s.to_ascii_lowercase().as_str()) {
        return Cell::Missing;
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Cell::Value(v),
        _ => Cell::Bad,
    }
}

/// Reads a flow-record CSV. Missing numeric cells become NaN for later
/// imputation; rows with text in a numeric column are dropped and counted.
pub fn ingest_csv(path: &Path, config: &PreprocessConfig) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, &path.display().to_string(), config)
}

pub fn ingest_reader<R: std::io::Read>(reader: R, source: &str, config: &PreprocessConfig) -> Result<Dataset> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Data(format!("{source}: empty file")));
    }
    let label_idx = header
        .iter()
        .position(|h| *h == config.label_column)
        .ok_or_else(|| Error::Data(format!("{source}: label column `{}` not found", config.label_column)))?;
    for c in config.categorical_columns.iter().chain(&config.drop_columns) {
        if !header.contains(c) {
            return Err(Error::Data(format!("{source}: column `{c}` not found")));
        }
    }
    let is_cat = |i: usize| config.categorical_columns.contains(&header[i]);
    let skip = |i: usize| i == label_idx || config.drop_columns.contains(&header[i]);
    let numeric: Vec<usize> = (0..header.len()).filter(|&i| !skip(i) && !is_cat(i)).collect();
    let categorical: Vec<usize> = (0..header.len()).filter(|&i| !skip(i) && is_cat(i)).collect();

    let mut rows: Vec<(Vec<f64>, Vec<String>, String)> = Vec::new();
    let (mut total, mut bad_rows, mut missing_cells) = (0usize, 0usize, 0usize);
    for rec in r.records() {
        let rec = rec?;
        total += 1;
        let mut values = Vec::with_capacity(numeric.len());
        let mut ok = true;
        for &i in &numeric {
            match parse_cell(rec.get(i).unwrap_or("")) {
                Cell::Value(v) => values.push(v),
                Cell::Missing => {
                    missing_cells += 1;
                    values.push(f64::NAN);
                }
                Cell::Bad => {
                    ok = false;
                    break;
                }
            }
        }
        let label = rec.get(label_idx).unwrap_or("").to_string();
        if !ok || label.is_empty() {
            bad_rows += 1;
            log::debug!("{source}: dropping record {total}");
            continue;
        }
        let cats = categorical.iter().map(|&i| rec.get(i).unwrap_or("").to_string()).collect();
        rows.push((values, cats, label));
    }
    if total == 0 {
        return Err(Error::Data(format!("{source}: no data rows")));
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{source}: all {total} rows were dropped")));
    }
    if bad_rows > 0 {
        log::warn!("{source}: dropped {bad_rows} of {total} rows with unparseable fields");
    }

    let levels: Vec<Vec<String>> = (0..categorical.len())
        .map(|k| rows.iter().map(|r| r.1[k].clone()).collect::<BTreeSet<_>>().into_iter().collect())
        .collect();
    let mut feature_names: Vec<String> = numeric.iter().map(|&i| header[i].clone()).collect();
    for (k, &i) in categorical.iter().enumerate() {
        feature_names.extend(levels[k].iter().map(|v| format!("{}={v}", header[i])));
    }

    let (class_names, label_of) = label_mapping(rows.iter().map(|r| r.2.as_str()), config);
    let mut data = Vec::with_capacity(rows.len() * feature_names.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (values, cats, label) in &rows {
        data.extend_from_slice(values);
        for (k, v) in cats.iter().enumerate() {
            data.extend(levels[k].iter().map(|l| if l == v { 1.0 } else { 0.0 }));
        }
        labels.push(label_of[label.as_str()]);
    }
    let features = Matrix::from_vec(rows.len(), feature_names.len(), data)?;
    let mut ds = Dataset {
        features,
        labels,
        class_names,
        feature_names,
        provenance: Provenance { source: source.to_string(), transforms: Vec::new() },
    };
    ds.validate()?;
    ds.log(format!("ingest: {total} rows read, {bad_rows} dropped, {missing_cells} missing cells"));
    for (k, &i) in categorical.iter().enumerate() {
        ds.log(format!("one-hot: {} -> {} columns", header[i], levels[k].len()));
    }
    Ok(ds)
}

/// Class names and the raw-label lookup. Binary mode folds every raw label
/// into benign (class 0) or attack (class 1).
fn label_mapping<'a>(
    raw: impl Iterator<Item = &'a str>,
    config: &PreprocessConfig,
) -> (Vec<String>, BTreeMap<&'a str, usize>) {
    let distinct: BTreeSet<&str> = raw.collect();
    match config.mode {
        LabelMode::Binary => {
            let is_attack = |l: &str| {
                if config.positive_classes.is_empty() {
                    l != config.benign_class
                } else {
                    config.positive_classes.iter().any(|p| p == l)
                }
            };
            let map = distinct.into_iter().map(|l| (l, usize::from(is_attack(l)))).collect();
            (vec![config.benign_class.clone(), "attack".to_string()], map)
        }
        LabelMode::Multiclass => {
            let names: Vec<String> = distinct.iter().map(|s| s.to_string()).collect();
            let map = distinct.into_iter().enumerate().map(|(i, l)| (l, i)).collect();
            (names, map)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PreprocessConfig {
        PreprocessConfig { categorical_columns: vec!["proto".into()], ..PreprocessConfig::default() }
    }

    #[test]
    fn one_hot_width() {
        let csv = "dur,bytes,proto,label\n1,10,tcp,benign\n2,20,udp,dos\n3,30,tcp,benign\n";
        let ds = ingest_reader(csv.as_bytes(), "toy", &cfg()).unwrap();
        assert_eq!(ds.num_features(), 2 + 2);
        assert_eq!(ds.feature_names, ["dur", "bytes", "proto=tcp", "proto=udp"]);
        assert_eq!(ds.features.row(1), [2.0, 20.0, 0.0, 1.0]);
        assert_eq!(ds.labels, [0, 1, 0]);
    }

    #[test]
    fn missing_label_column_is_named() {
        let err = ingest_reader("a,b\n1,2\n".as_bytes(), "toy", &PreprocessConfig::default()).unwrap_err();
        assert!(err.to_string().contains("`label`"), "{err}");
    }

    #[test]
    fn text_in_numeric_field_drops_row() {
        let csv = "dur,label\n1,benign\nfast,dos\n?,dos\n";
        let ds = ingest_reader(csv.as_bytes(), "toy", &PreprocessConfig::default()).unwrap();
        assert_eq!(ds.len(), 2);
        assert!(ds.features.row(1)[0].is_nan());
        assert!(ds.provenance.transforms[0].contains("1 dropped"));
    }

    #[test]
    fn empty_and_all_dropped() {
        assert!(ingest_reader("".as_bytes(), "e", &PreprocessConfig::default()).is_err());
        assert!(ingest_reader("dur,label\n".as_bytes(), "e", &PreprocessConfig::default()).is_err());
        assert!(ingest_reader("dur,label\nx,benign\n".as_bytes(), "e", &PreprocessConfig::default()).is_err());
    }

    #[test]
    fn multiclass_names_sorted() {
        let config = PreprocessConfig { mode: LabelMode::Multiclass, ..PreprocessConfig::default() };
        let ds = ingest_reader("x,label\n1,probe\n2,benign\n3,dos\n".as_bytes(), "t", &config).unwrap();
        assert_eq!(ds.class_names, ["benign", "dos", "probe"]);
        assert_eq!(ds.labels, [2, 0, 1]);
    }
}
