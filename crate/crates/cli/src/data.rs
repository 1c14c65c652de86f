//! CSV ingestion and emission. Headers are mandatory; all floats are written
//! with 17 significant digits so a write/read round trip is lossless.

use std::path::Path;

use nalgebra::DMatrix;

use dagscore::mnw::{PredictorPool, ResponseMatrix};

use crate::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

/// Parses a headed numeric CSV. Errors carry 1-based row/column coordinates;
/// non-finite values are rejected.
pub fn read_matrix_csv(path: &Path) -> Result<(DMatrix<f64>, Vec<String>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    let labels: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("{}: bad header: {e}", path.display())))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if labels.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: header row is empty",
            path.display()
        )));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            CliError::Validation(format!("{}: line {}: {e}", path.display(), i + 2))
        })?;
        if record.len() != labels.len() {
            return Err(CliError::Validation(format!(
                "{}: line {}: {} fields, expected {}",
                path.display(),
                i + 2,
                record.len(),
                labels.len()
            )));
        }
        let mut row = Vec::with_capacity(labels.len());
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                CliError::Validation(format!(
                    "{}: line {}, column {}: cannot parse {field:?} as a number",
                    path.display(),
                    i + 2,
                    j + 1
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::Validation(format!(
                    "{}: line {}, column {}: non-finite value {field:?}",
                    path.display(),
                    i + 2,
                    j + 1
                )));
            }
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let values = DMatrix::from_fn(rows.len(), labels.len(), |i, j| rows[i][j]);
    Ok((values, labels))
}

pub fn read_response(path: &Path) -> Result<ResponseMatrix, CliError> {
    let (values, labels) = read_matrix_csv(path)?;
    Ok(ResponseMatrix::new(values, labels)?)
}

pub fn read_predictor_pool(path: &Path) -> Result<PredictorPool, CliError> {
    let (values, labels) = read_matrix_csv(path)?;
    Ok(PredictorPool::new(values, labels)?)
}

pub fn write_matrix_csv(
    path: &Path,
    values: &DMatrix<f64>,
    labels: &[String],
) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&labels.join(","));
    out.push('\n');
    for i in 0..values.nrows() {
        for j in 0..values.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_float(values[(i, j)]));
        }
        out.push('\n');
    }
    std::fs::write(path, out)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// 17 significant digits, enough to reproduce any f64 exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
