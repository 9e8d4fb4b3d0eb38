//! Result documents rendered as `#`-commented CSV or a flat JSON object.

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => num(*v),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Non-finite numbers become `null`.
fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

#[derive(Debug, Clone, Default)]
pub struct Document {
    pub command: String,
    /// Scalar results and provenance, in insertion order.
    pub meta: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Document {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Self::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) -> &mut Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }

    pub fn flag(&mut self, key: &str, value: bool) -> &mut Self {
        self.meta(key, value)
    }

    pub fn columns(&mut self, names: &[&str]) -> &mut Self {
        self.columns = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn csv(&self) -> CliResult<Vec<u8>> {
        let mut out = Vec::new();
        writeln!(out, "# qfc {}", self.command).unwrap();
        writeln!(out, "# schema_version: {SCHEMA_VERSION}").unwrap();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {}", v.render()).unwrap();
        }
        if self.columns.is_empty() {
            return Ok(out);
        }
        let mut w = csv::Writer::from_writer(out);
        let write_err = |e: csv::Error| CliError::Usage(format!("csv encoding failed: {e}"));
        w.write_record(&self.columns).map_err(write_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(write_err)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Usage(format!("csv encoding failed: {e}")))
    }

    fn json(&self) -> CliResult<Vec<u8>> {
        let mut obj = Map::new();
        obj.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
        obj.insert("command".into(), Value::String(self.command.clone()));
        for (k, v) in &self.meta {
            obj.insert(k.clone(), v.json());
        }
        for (i, name) in self.columns.iter().enumerate() {
            let col: Vec<Value> = self.rows.iter().map(|r| r[i].json()).collect();
            obj.insert(name.clone(), Value::Array(col));
        }
        let mut out = serde_json::to_vec_pretty(&Value::Object(obj))
            .map_err(|e| CliError::Usage(format!("json encoding failed: {e}")))?;
        out.push(b'\n');
        Ok(out)
    }
}

/// Writes to `path`, or stdout when no path is given.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => match std::io::stdout().write_all(bytes) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
        },
    }
}
