//! CSV ingestion and export of complete series.
//!
//! One numeric column is read; the header row is optional and detected by
//! whether the first row parses as a number. Missing cells (`NA`, `NaN` or
//! empty) are rejected because benchmark input must be complete.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Selects the value column by header name or zero-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for Column {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_string()),
        })
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(
        cell,
        "" | "NA" | "na" | "N/A" | "NaN" | "nan" | "null" | "NULL"
    )
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn load_csv(path: &Path, column: Option<&Column>, period: Option<usize>) -> Result<TimeSeries> {
    let file = File::open(path)
        .map_err(|e| Error::Input(format!("cannot open {}: {e}", path.display())))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_csv(file, column, period, &label)
}

pub fn parse_csv<R: Read>(
    reader: R,
    column: Option<&Column>,
    period: Option<usize>,
    label: &str,
) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let rows: Vec<csv::StringRecord> = rdr
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Input(format!("malformed CSV: {e}")))?;
    let first = rows
        .first()
        .ok_or_else(|| Error::Input("CSV has no rows".into()))?;

    let data_row = |r: &csv::StringRecord| r.iter().any(|c| parse_number(c).is_some());
    let has_header = !data_row(first) || matches!(column, Some(Column::Name(_)));
    let (header, body) = if has_header {
        (Some(first), &rows[1..])
    } else {
        (None, &rows[..])
    };
    if body.is_empty() {
        return Err(Error::Input("CSV has no data rows".into()));
    }

    let col = match column {
        Some(Column::Index(i)) => *i,
        Some(Column::Name(name)) => header
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::Input(format!("no column named `{name}`")))?,
        // First column whose first data cell is numeric.
        None => body[0]
            .iter()
            .position(|c| parse_number(c).is_some())
            .ok_or_else(|| Error::Input("no numeric column found".into()))?,
    };

    let mut values = Vec::with_capacity(body.len());
    for (row_no, row) in body.iter().enumerate() {
        let line = row_no + 1 + usize::from(has_header);
        let cell = row.get(col).unwrap_or("");
        if is_missing(cell) {
            return Err(Error::IncompleteInput(format!(
                "missing value in column {col} at line {line}"
            )));
        }
        let v = parse_number(cell).ok_or_else(|| {
            Error::Input(format!(
                "non-numeric value `{cell}` in column {col} at line {line}"
            ))
        })?;
        values.push(v);
    }
    TimeSeries::new(values, period, label)
}

/// Writes a single `value` column using shortest round-trip decimals.
pub fn write_csv<W: Write>(series: &TimeSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    w.write_record(["value"]).map_err(io)?;
    for v in series.values() {
        w.write_record([v.to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
