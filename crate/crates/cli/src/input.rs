use std::fs;
use std::path::Path;

use covthresh::SampleMatrix;
use sha2::{Digest, Sha256};

use crate::failure::Failure;

/// A data file parsed as observations (rows) by variables (columns).
pub struct DataFile {
    pub matrix: SampleMatrix,
    pub sha256: String,
}

pub fn read_matrix(path: &Path, header: bool) -> Result<DataFile, Failure> {
    let bytes = fs::read(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let line = record.position().map_or(k + 1, |p| p.line() as usize);
        if *width.get_or_insert(record.len()) != record.len() {
            return Err(Failure::Input(format!(
                "{}: line {line} has {} fields, expected {}",
                path.display(),
                record.len(),
                width.unwrap_or(0)
            )));
        }
        for cell in record.iter() {
            let v: f64 = cell.parse().map_err(|_| {
                Failure::Input(format!(
                    "{}: line {line}: non-numeric cell '{cell}'",
                    path.display()
                ))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    let p = width.unwrap_or(0);
    if rows == 0 || p == 0 {
        return Err(Failure::Input(format!("{}: no data rows", path.display())));
    }
    let matrix = SampleMatrix::from_row_major(rows, p, &values)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(DataFile { matrix, sha256 })
}
