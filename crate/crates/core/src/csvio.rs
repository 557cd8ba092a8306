//! CSV files for signal matrices.
//!
//! Layout: a header `ch0,ch1,...` then one line per sample with one column
//! per channel. Values are written in Rust's shortest round-trip form.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use thiserror::Error;

use crate::model::{ModelError, SignalMatrix, SignalRole};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("line {line}: malformed value `{token}`")]
    MalformedCsv { line: usize, token: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    NonRectangular {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("file has no data rows")]
    EmptyFile,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn channel_header(channels: usize) -> Vec<String> {
    (0..channels).map(|i| format!("ch{i}")).collect()
}

/// Reads a sample-per-line CSV into a channel-per-row matrix.
///
/// The first line is a header and is only used for its column count.
pub fn load_csv(path: impl AsRef<Path>, role: SignalRole) -> Result<SignalMatrix, CsvError> {
    read_csv(File::open(path)?, role)
}

pub fn read_csv<R: Read>(reader: R, role: SignalRole) -> Result<SignalMatrix, CsvError> {
    let table = read_table(reader)?;
    let samples = table.len();
    let channels = table[0].len();
    let data = Array2::from_shape_fn((channels, samples), |(c, n)| table[n][c]);
    Ok(SignalMatrix::new(data, role)?)
}

/// Reads the numeric body of a headed CSV as rows of values.
pub fn read_table<R: Read>(reader: R) -> Result<Vec<Vec<f64>>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let expected = rdr.headers()?.len();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        // Header is line 1.
        let line = record.position().map_or(rows.len() + 2, |p| p.line() as usize);
        if record.len() != expected {
            return Err(CsvError::NonRectangular {
                line,
                expected,
                found: record.len(),
            });
        }
        let row = record
            .iter()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| CsvError::MalformedCsv {
                    line,
                    token: tok.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() || expected == 0 {
        return Err(CsvError::EmptyFile);
    }
    Ok(rows)
}

pub fn save_csv(matrix: &SignalMatrix, path: impl AsRef<Path>) -> Result<(), CsvError> {
    let mut file = File::create(path)?;
    write_csv(matrix, &mut file)?;
    file.flush()?;
    Ok(())
}

pub fn write_csv<W: Write>(matrix: &SignalMatrix, writer: W) -> Result<(), CsvError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(channel_header(matrix.channels()))?;
    for n in 0..matrix.samples() {
        wtr.write_record(matrix.point(n).iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes an arbitrary table with the given header.
pub fn write_table<W: Write>(
    writer: W,
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CsvError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(header)?;
    for row in rows {
        wtr.write_record(row)?;
    }
    wtr.flush()?;
    Ok(())
}
