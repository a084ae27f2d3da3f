//! Delimited-text residual ingestion and fixture writing.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ebr::ResidualMatrix;
use crate::error::{EbrError, Result};

/// Which axis the file's rows run along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// One row per cross-sectional unit.
    #[default]
    UnitsRows,
    /// One row per time period; transposed on ingest.
    PeriodsRows,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestSpec {
    pub path: PathBuf,
    pub delimiter: u8,
    pub has_header: bool,
    pub has_row_labels: bool,
    pub orientation: Orientation,
}

impl IngestSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into(), delimiter: b',', has_header: false, has_row_labels: false, orientation: Orientation::UnitsRows }
    }
}

/// Reads a residual matrix in canonical units × periods orientation.
pub fn ingest(spec: &IngestSpec) -> Result<ResidualMatrix> {
    let mut text = String::new();
    fs::File::open(&spec.path)?.read_to_string(&mut text)?;
    let label = spec.path.file_stem().map(|s| s.to_string_lossy().into_owned());
    let e = parse(&text, spec)?;
    Ok(match label {
        Some(l) => e.with_label(l),
        None => e,
    })
}

/// Parses delimited text per `spec` (its `path` is only used for labelling).
pub fn parse(text: &str, spec: &IngestSpec) -> Result<ResidualMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter)
        .has_headers(spec.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let skip = usize::from(spec.has_row_labels);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for record in reader.records() {
        let record = record.map_err(|e| EbrError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            column: None,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.len() <= skip {
            return Err(EbrError::Parse { line, column: None, message: "row has no numeric cells".into() });
        }
        let mut row = Vec::with_capacity(record.len() - skip);
        for (c, field) in record.iter().enumerate().skip(skip) {
            let value: f64 = field.parse().map_err(|_| EbrError::Parse {
                line,
                column: Some(c + 1),
                message: format!("not a number: {field:?}"),
            })?;
            if !value.is_finite() {
                return Err(EbrError::Parse {
                    line,
                    column: Some(c + 1),
                    message: format!("non-finite value {field:?} (missing residuals are not imputed)"),
                });
            }
            row.push(value);
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(EbrError::Parse {
                    line,
                    column: None,
                    message: format!("ragged row: {} cells, expected {w}", row.len()),
                })
            }
            _ => {}
        }
        rows.push(row);
    }
    let Some(width) = width else {
        return Err(EbrError::Parse { line: 1, column: None, message: "no data rows".into() });
    };
    let raw = DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]);
    let values = match spec.orientation {
        Orientation::UnitsRows => raw,
        Orientation::PeriodsRows => raw.transpose(),
    };
    ResidualMatrix::new(values)
}

/// Writes `e` one unit per row in shortest round-trip decimal form, so
/// re-ingesting yields bitwise-identical values.
pub fn write_matrix<W: Write>(out: &mut W, e: &ResidualMatrix, delimiter: u8) -> Result<()> {
    let sep = char::from(delimiter).to_string();
    for i in 0..e.n_units() {
        let line: Vec<String> = e.values().row(i).iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(&sep))?;
    }
    Ok(())
}

pub fn write_matrix_file(path: &Path, e: &ResidualMatrix, delimiter: u8) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    write_matrix(&mut f, e, delimiter)?;
    f.flush()?;
    Ok(())
}
