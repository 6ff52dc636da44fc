//! CSV ingestion and plain-text outputs.

use std::fs;
use std::io::Write;
use std::path::Path;

use less_core::DatasetF64;
use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// A numeric CSV file: header plus rows.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn data_err(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {msg}", path.display()))
}

/// Reads a comma-separated file with a header row. Every cell must parse as a
/// finite number.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data_err(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| data_err(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(data_err(path, "missing header row"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.position() {
            Some(p) => data_err(path, format!("line {}: {e}", p.line())),
            None => data_err(path, e),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .zip(&header)
            .map(|(cell, name)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(data_err(
                    path,
                    format!("line {line}, column {name:?}: {cell:?} is not a finite number"),
                )),
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Training data: every column except `target` is a feature.
pub fn load_training(path: &Path, target: &str) -> CliResult<DatasetF64> {
    let table = read_table(path)?;
    let t = table.header.iter().position(|h| h == target).ok_or_else(|| {
        data_err(
            path,
            format!("target column {target:?} not found; columns are {:?}", table.header),
        )
    })?;
    if table.header.len() < 2 {
        return Err(data_err(path, "need at least one feature column besides the target"));
    }
    if table.rows.is_empty() {
        return Err(data_err(path, "no data rows"));
    }
    let p = table.header.len() - 1;
    let names: Vec<String> = table
        .header
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != t)
        .map(|(_, h)| h.clone())
        .collect();
    let mut xs = Vec::with_capacity(table.rows.len() * p);
    let mut ys = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        for (c, &v) in row.iter().enumerate() {
            if c == t {
                ys.push(v);
            } else {
                xs.push(v);
            }
        }
    }
    let x = Array2::from_shape_vec((ys.len(), p), xs).map_err(|e| data_err(path, e))?;
    Ok(DatasetF64::new(x, Array1::from(ys))?
        .with_feature_names(names)?
        .with_target_name(target))
}

/// Feature matrix whose columns follow `features`. A column named `target`
/// may be present and is ignored; any other unknown or missing column is an error.
pub fn load_features(path: &Path, features: &[String], target: Option<&str>) -> CliResult<Array2<f64>> {
    let table = read_table(path)?;
    let missing: Vec<&String> = features.iter().filter(|f| !table.header.contains(f)).collect();
    let extra: Vec<&String> = table
        .header
        .iter()
        .filter(|h| !features.contains(h) && Some(h.as_str()) != target)
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(data_err(
            path,
            format!("column mismatch: missing {missing:?}, unexpected {extra:?}"),
        ));
    }
    let order: Vec<usize> = features
        .iter()
        .map(|f| table.header.iter().position(|h| h == f).expect("checked above"))
        .collect();
    let n = table.rows.len();
    let mut x = Array2::zeros((n, features.len()));
    for (i, row) in table.rows.iter().enumerate() {
        for (j, &c) in order.iter().enumerate() {
            x[[i, j]] = row[c];
        }
    }
    Ok(x)
}

/// One value per line, printed with the shortest representation that parses back exactly.
pub fn write_predictions(path: &Path, values: &[f64]) -> CliResult<()> {
    let mut out = String::with_capacity(values.len() * 20);
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    fs::write(path, out).map_err(|e| data_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| data_err(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| data_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| data_err(path, e))
}

pub fn write_json<S: serde::Serialize>(path: &Path, value: &S) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| data_err(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| data_err(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Tab-separated text with a header line.
pub fn tsv<R: AsRef<[f64]>>(header: &[&str], rows: &[R]) -> String {
    let mut s = header.join("\t");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.as_ref().iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join("\t"));
        s.push('\n');
    }
    s
}
