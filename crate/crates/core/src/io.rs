//! File formats: copula JSON and numeric CSV tables.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::copula::CheckerboardCopula;
use crate::error::{Error, Result};

/// On-disk copula: `{"dims", "resolutions", "mass"}` with `mass` row-major,
/// last axis fastest.
#[derive(Debug, Serialize, Deserialize)]
struct CopulaFile {
    dims: usize,
    resolutions: Vec<usize>,
    mass: Vec<f64>,
}

pub fn copula_to_json(copula: &CheckerboardCopula) -> Result<String> {
    let file = CopulaFile {
        dims: copula.dims(),
        resolutions: copula.resolutions().to_vec(),
        mass: copula.mass().to_vec(),
    };
    Ok(serde_json::to_string(&file)?)
}

/// Parses and validates a copula document.
pub fn copula_from_json(text: &str) -> Result<CheckerboardCopula> {
    let file: CopulaFile = serde_json::from_str(text)?;
    if file.dims != file.resolutions.len() {
        return Err(Error::invalid(format!(
            "dims = {} but {} resolutions given",
            file.dims,
            file.resolutions.len()
        )));
    }
    CheckerboardCopula::new(file.resolutions, file.mass)
}

pub fn read_copula(path: &Path) -> Result<CheckerboardCopula> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    copula_from_json(&text)
}

pub fn write_copula(path: &Path, copula: &CheckerboardCopula) -> Result<()> {
    let mut f = File::create(path)?;
    f.write_all(copula_to_json(copula)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

/// A numeric table read from CSV, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Option<Vec<String>>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Resolves a column selector: a header name, or a 0-based index.
    pub fn resolve(&self, selector: &str) -> Result<usize> {
        let selector = selector.trim();
        if let Some(h) = &self.headers {
            if let Some(i) = h.iter().position(|name| name == selector) {
                return Ok(i);
            }
        }
        match selector.parse::<usize>() {
            Ok(i) if i < self.n_cols() => Ok(i),
            _ => Err(Error::invalid(format!("unknown column '{selector}'"))),
        }
    }

    pub fn select(&self, columns: &[usize]) -> Table {
        Table {
            headers: self
                .headers
                .as_ref()
                .map(|h| columns.iter().map(|&c| h[c].clone()).collect()),
            columns: columns.iter().map(|&c| self.columns[c].clone()).collect(),
        }
    }

    /// Row-major copy of the data.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows())
            .map(|r| self.columns.iter().map(|c| c[r]).collect())
            .collect()
    }
}

/// Reads a comma-separated table. The first row is taken as a header when
/// any of its fields fails to parse as a number.
pub fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut headers = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if line == 0 {
            if record.iter().any(|f| f.parse::<f64>().is_err()) {
                headers = Some(record.iter().map(str::to_string).collect::<Vec<_>>());
                columns = vec![Vec::new(); record.len()];
                continue;
            }
            columns = vec![Vec::new(); record.len()];
        }
        if record.len() != columns.len() {
            return Err(Error::invalid(format!(
                "row {} has {} fields, expected {}",
                line + 1,
                record.len(),
                columns.len()
            )));
        }
        for (col, field) in record.iter().enumerate() {
            let v = field.parse::<f64>().map_err(|_| Error::InvalidData {
                column: col,
                message: format!("row {}: '{field}' is not a number", line + 1),
            })?;
            columns[col].push(v);
        }
    }
    Ok(Table { headers, columns })
}

pub fn read_table_file(path: &Path) -> Result<Table> {
    read_table(BufReader::new(File::open(path)?))
}

/// Writes rows as CSV with an optional header line.
pub fn write_table<W: Write>(writer: W, headers: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if !headers.is_empty() {
        w.write_record(headers)?;
    }
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}
