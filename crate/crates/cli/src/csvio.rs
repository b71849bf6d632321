//! Dataset ingestion and result persistence. Datasets are plain CSV with a
//! mandatory header row; every non-response column must parse as a float
//! (scientific notation accepted). Floats are written in shortest
//! round-trip form, so a write/read cycle reproduces values exactly.

use std::collections::HashSet;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::errors::CliError;

pub struct LoadedDataset {
    /// Feature column names in file order (response removed).
    pub feature_names: Vec<String>,
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

pub fn read_dataset(path: &Path, response: &str) -> Result<LoadedDataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::config(format!("cannot open {}: {e}", path.display())))?;
    let headers: Vec<String> =
        reader.headers()?.iter().map(|h| h.to_string()).collect();

    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.clone()) {
            return Err(CliError::config(format!("duplicate header `{h}`")));
        }
    }
    let response_idx = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| CliError::config(format!("response column `{response}` not found")))?;

    let feature_names: Vec<String> =
        headers.iter().enumerate().filter(|(i, _)| *i != response_idx).map(|(_, h)| h.clone()).collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut y = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(CliError::config(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                record.len(),
                headers.len()
            )));
        }
        let mut row = Vec::with_capacity(headers.len() - 1);
        for (i, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                CliError::config(format!("non-numeric value `{field}` in column `{}`", headers[i]))
            })?;
            if i == response_idx {
                y.push(value);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::config("dataset has no data rows".to_string()));
    }
    let n = rows.len();
    let p = feature_names.len();
    if p == 0 {
        return Err(CliError::config("dataset has no feature columns".to_string()));
    }
    let mut x = Array2::<f64>::zeros((n, p));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            x[[i, j]] = *v;
        }
    }
    Ok(LoadedDataset { feature_names, x, y: Array1::from(y) })
}

/// Shortest round-trip float formatting: deterministic bytes, exact reload.
pub fn fmt_float(v: f64) -> String {
    format!("{v}")
}
