//! CSV input and output.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use sphering::linalg::Matrix;
use sphering::{datasets, DataMatrix};

use crate::CliError;

/// Name that selects the bundled iris data instead of a file.
pub const BUILTIN_IRIS: &str = "iris";

/// Reads `source`, which is either a CSV path or the builtin name `iris`.
/// To read a file literally called `iris`, pass `./iris`.
pub fn read_csv(source: &str) -> Result<DataMatrix, CliError> {
    if source.eq_ignore_ascii_case(BUILTIN_IRIS) {
        return Ok(datasets::iris());
    }
    let path = Path::new(source);
    let file = File::open(path).map_err(|e| CliError::Io {
        context: format!("cannot open {}", path.display()),
        source: e,
    })?;
    parse_csv(file)
}

/// Parses comma-separated text with one header row. Every data cell must be
/// a finite decimal number and every row must have as many cells as the
/// header.
pub fn parse_csv<R: Read>(reader: R) -> Result<DataMatrix, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let names: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_owned)
        .collect();
    let d = names.len();

    let mut cells = Vec::new();
    let mut n = 0;
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        for (col, cell) in record.iter().enumerate() {
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Parse {
                    line,
                    column: col + 1,
                    message: format!(
                        "cell '{cell}' in column '{}' is not a finite number",
                        names[col]
                    ),
                })?;
            cells.push(value);
        }
        n += 1;
    }

    let values = Matrix::from_row_slice(n, d, &cells);
    Ok(DataMatrix::new(values)?.with_column_names(names)?)
}

fn csv_error(e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => CliError::Parse {
            line,
            column: (*len as usize).min(*expected_len as usize) + 1,
            message: format!("row has {len} fields, header has {expected_len}"),
        },
        _ => CliError::Parse {
            line,
            column: 0,
            message: e.to_string(),
        },
    }
}

/// Writes `x` with a header row. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_csv<W: Write>(x: &DataMatrix, writer: W) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let header: Vec<String> = match x.column_names() {
        Some(names) => names.to_vec(),
        None => (1..=x.ncols()).map(|i| format!("x{i}")).collect(),
    };
    wtr.write_record(&header).map_err(write_error)?;
    for row in x.values().row_iter() {
        wtr.write_record(row.iter().map(|v| v.to_string()))
            .map_err(write_error)?;
    }
    wtr.flush().map_err(|e| CliError::Io {
        context: "cannot write CSV".into(),
        source: e,
    })
}

fn write_error(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            context: "cannot write CSV".into(),
            source,
        },
        other => CliError::Parse {
            line: 0,
            column: 0,
            message: format!("{other:?}"),
        },
    }
}
