//! CSV ingestion: a header row, numeric cells, one response column (plus a
//! status column for survival data), all other columns as predictors.

use std::io::Read;
use std::path::Path;

use ndarray::Array2;

use crate::design::DesignMatrix;
use crate::error::{FsrError, Result};
use crate::solvers::{Family, Response};

/// Which columns hold the outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseSpec {
    pub family: Family,
    pub response: String,
    /// Required for Cox.
    pub status: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: DesignMatrix,
    pub y: Response,
}

fn malformed(row: usize, column: &str, message: impl Into<String>) -> FsrError {
    FsrError::MalformedCsv { row, column: column.to_string(), message: message.into() }
}

/// Parse a dataset. Rows are reported 1-based counting the header as row 1.
pub fn read_dataset<R: Read>(reader: R, spec: &ResponseSpec) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(malformed(1, "", "missing header row"));
    }
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| malformed(1, name, format!("column not found in header {header:?}")))
    };
    let y_col = find(&spec.response)?;
    let status_col = match (spec.family, &spec.status) {
        (Family::Cox, Some(s)) => Some(find(s)?),
        (Family::Cox, None) => {
            return Err(FsrError::InvalidConfig("Cox models need a status column".into()));
        }
        (_, Some(_)) => {
            return Err(FsrError::InvalidConfig("a status column only applies to Cox models".into()));
        }
        (_, None) => None,
    };
    let predictors: Vec<usize> = (0..header.len()).filter(|&j| j != y_col && Some(j) != status_col).collect();
    if predictors.is_empty() {
        return Err(malformed(1, "", "no predictor columns"));
    }

    let mut values = Vec::new();
    let mut y = Vec::new();
    let mut status = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let row = k + 2;
        let record = record?;
        if record.len() != header.len() {
            return Err(malformed(row, "", format!("expected {} fields, found {}", header.len(), record.len())));
        }
        let cell = |j: usize| -> Result<f64> {
            let raw = &record[j];
            let v: f64 = raw.parse().map_err(|_| malformed(row, &header[j], format!("'{raw}' is not a number")))?;
            if !v.is_finite() {
                return Err(malformed(row, &header[j], format!("'{raw}' is not finite")));
            }
            Ok(v)
        };
        for &j in &predictors {
            values.push(cell(j)?);
        }
        let yv = cell(y_col)?;
        match spec.family {
            Family::Logistic if yv != 0.0 && yv != 1.0 => {
                return Err(malformed(row, &header[y_col], format!("binary response must be 0 or 1, got {yv}")));
            }
            Family::Cox if yv <= 0.0 => {
                return Err(malformed(row, &header[y_col], format!("survival time must be positive, got {yv}")));
            }
            _ => {}
        }
        y.push(yv);
        if let Some(s) = status_col {
            let d = cell(s)?;
            if d != 0.0 && d != 1.0 {
                return Err(malformed(row, &header[s], format!("status must be 0 or 1, got {d}")));
            }
            status.push(d);
        }
    }
    let n = y.len();
    if n < 2 {
        return Err(malformed(n + 1, "", "need at least two data rows"));
    }
    let x = Array2::from_shape_vec((n, predictors.len()), values).expect("row-major cell count");
    let names = predictors.iter().map(|&j| header[j].clone()).collect();
    let x = DesignMatrix::new(x, names)?;
    let y = match spec.family {
        Family::Linear => Response::continuous(y)?,
        Family::Logistic => Response::binary(y)?,
        Family::Cox => Response::survival(y, status)?,
    };
    Ok(Dataset { x, y })
}

pub fn read_dataset_file(path: &Path, spec: &ResponseSpec) -> Result<Dataset> {
    read_dataset(std::fs::File::open(path)?, spec)
}
