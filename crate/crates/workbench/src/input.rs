//! Reading scan and histogram CSV files.

use std::fs;
use std::path::Path;

use cavity_qfc::estimation::{AbscissaUnit, ScanSeries};

use crate::error::{CliError, CliResult};

/// Header names and numeric rows, with the 1-based file line of each row.
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<(u64, Vec<f64>)>,
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(&e))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.iter().all(String::is_empty) {
        return Err(CliError::parse(1, "missing header row"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let values = record
            .iter()
            .enumerate()
            .map(|(i, field)| {
                field.parse::<f64>().map_err(|_| {
                    CliError::parse(line, format!("column {:?}: {field:?} is not a number", headers[i]))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push((line, values));
    }
    if rows.is_empty() {
        return Err(CliError::parse(1, "no data rows"));
    }
    Ok(Table { headers, rows })
}

fn csv_error(e: &csv::Error) -> CliError {
    let line = e.position().map(|p| p.line()).unwrap_or(1);
    CliError::parse(line, e.to_string())
}

impl Table {
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|(_, r)| r[i]).collect()
    }

    pub fn find(&self, pred: impl Fn(&str) -> bool) -> Option<usize> {
        self.headers.iter().position(|h| pred(h))
    }
}

/// Unit of a column named `<quantity>_<unit>`.
pub fn unit_of(header: &str) -> Option<AbscissaUnit> {
    header.rsplit_once('_').and_then(|(_, u)| AbscissaUnit::from_suffix(u))
}

/// First column is the abscissa (unit in its name), second the values, and an
/// optional column named `sigma` holds per-point uncertainties.
pub fn read_series(path: &Path) -> CliResult<ScanSeries> {
    let table = read_table(path)?;
    if table.headers.len() < 2 {
        return Err(CliError::parse(1, "need an abscissa and a value column"));
    }
    let unit = unit_of(&table.headers[0]).ok_or_else(|| {
        CliError::parse(
            1,
            format!(
                "first column {:?} must end in a unit suffix (_mW, _nm, _GHz, _MHz, _ns)",
                table.headers[0]
            ),
        )
    })?;
    let x = table.column(0);
    if let Some(w) = table.rows.windows(2).find(|w| w[1].1[0] <= w[0].1[0]) {
        return Err(CliError::parse(w[1].0, "abscissa must be strictly increasing"));
    }
    let sigma = table.find(|h| h == "sigma").map(|i| table.column(i));
    Ok(ScanSeries::new(unit, x, table.column(1), sigma)?)
}
