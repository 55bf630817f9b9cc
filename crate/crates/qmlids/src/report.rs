//! Comparison tables: one row per model, one F1 column per data set, plus a
//! column per class for multiclass data sets.

use crate::error::Result;
use crate::experiment::MetricsReport;

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn push_unique(list: &mut Vec<String>, item: &str) {
    if !list.iter().any(|s| s == item) {
        list.push(item.to_string());
    }
}

/// F1 values in percent with two decimals; `-` marks a missing cell.
pub fn comparison_table(reports: &[MetricsReport]) -> Table {
    let mut models = Vec::new();
    let mut columns: Vec<(String, Option<String>)> = Vec::new();
    for r in reports {
        push_unique(&mut models, &r.model_id);
        if !columns.iter().any(|(d, c)| d == &r.dataset && c.is_none()) {
            columns.push((r.dataset.clone(), None));
        }
    }
    for r in reports.iter().filter(|r| r.per_class.len() > 2) {
        for c in &r.per_class {
            let key = (r.dataset.clone(), Some(c.class.clone()));
            if !columns.contains(&key) {
                columns.push(key);
            }
        }
    }
    let mut header = vec!["model".to_string()];
    header.extend(columns.iter().map(|(d, c)| match c {
        None => d.clone(),
        Some(c) => format!("{d}:{c}"),
    }));
    let rows = models
        .iter()
        .map(|m| {
            let mut row = vec![m.clone()];
            for (d, c) in &columns {
                let r = reports.iter().find(|r| &r.model_id == m && &r.dataset == d);
                let v = r.and_then(|r| match c {
                    None => Some(r.macro_f1),
                    Some(c) => r.class_f1(c),
                });
                row.push(v.map_or_else(|| "-".to_string(), |v| format!("{:.2}", 100.0 * v)));
            }
            row
        })
        .collect();
    Table { header, rows }
}

impl Table {
    /// Left-aligned first column, right-aligned numbers.
    pub fn to_text(&self) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|j| self.rows.iter().map(|r| r[j].len()).chain([self.header[j].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| -> String {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(j, c)| if j == 0 { format!("{c:<w$}", w = widths[0]) } else { format!("{c:>w$}", w = widths[j]) })
                .collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.header);
        out.push_str(&(widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  ") + "\n"));
        self.rows.iter().for_each(|r| out.push_str(&line(r)));
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Data(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv of UTF-8 strings"))
    }
}
