//! Result tables and their CSV and JSON renderings.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::CliError;

/// One table entry.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn to_csv_field(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // Rust's float formatting is locale-free and round-trips.
            Cell::Float(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Float(x) => Value::from(*x),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Named rectangular table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_columns(name: impl Into<String>, columns: Vec<String>) -> Self {
        Table {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width of {}", self.name);
        self.rows.push(row);
    }

    /// Numeric value in column `column` of row `row`.
    pub fn number(&self, row: usize, column: &str) -> Option<f64> {
        let j = self.columns.iter().position(|c| c == column)?;
        match self.rows.get(row)?.get(j)? {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            _ => None,
        }
    }

    /// First row whose `column` holds the number `value`.
    pub fn find_row(&self, column: &str, value: f64) -> Option<usize> {
        (0..self.rows.len()).find(|&i| self.number(i, column) == Some(value))
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv_field))
                .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    /// Rows as objects keyed by column name.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::to_json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub tables: Vec<Table>,
    /// Scalar results, also echoed to stderr in CSV mode.
    pub summary: BTreeMap<String, Value>,
    /// Failed validation checks; nonempty means exit code 4.
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(experiment: impl Into<String>) -> Self {
        Report {
            experiment: experiment.into(),
            ..Default::default()
        }
    }

    pub fn summarize(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.summary.insert(key.into(), value.into());
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Pretty JSON; object keys come out sorted because `serde_json::Map`
    /// is ordered.
    pub fn to_json(&self) -> String {
        let tables: Map<String, Value> = self
            .tables
            .iter()
            .map(|t| (t.name.clone(), t.to_json()))
            .collect();
        let doc = serde_json::json!({
            "experiment": self.experiment,
            "failures": self.failures,
            "summary": self.summary,
            "tables": tables,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        text.push('\n');
        text
    }

    /// CSV of every table; with several tables each block is preceded by a
    /// `# name` line and blocks are separated by a blank line.
    pub fn to_csv_stream(&self) -> Vec<u8> {
        if let [only] = self.tables.as_slice() {
            return only.to_csv();
        }
        let mut out = Vec::new();
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push(b'\n');
            }
            out.extend_from_slice(format!("# {}\n", t.name).as_bytes());
            out.extend_from_slice(&t.to_csv());
        }
        out
    }

    /// `key: value` lines for the terminal.
    pub fn summary_lines(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.summary {
            s.push_str(&format!("{k}: {v}\n"));
        }
        for f in &self.failures {
            s.push_str(&format!("FAILED: {f}\n"));
        }
        s
    }
}

/// File name for table `name` when a report is split over several CSVs:
/// `results.csv` becomes `results_<name>.csv`.
pub fn table_path(out: &Path, name: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = match out.extension() {
        Some(ext) => format!("{stem}_{name}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{name}"),
    };
    out.with_file_name(file)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes `report` to `out` or stdout and returns the paths written.
/// Several CSV tables written to a file become one file per table.
pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    match (format, out) {
        (Format::Json, Some(path)) => {
            write_file(path, report.to_json().as_bytes())?;
            Ok(vec![path.to_path_buf()])
        }
        (Format::Csv, Some(path)) if report.tables.len() == 1 => {
            write_file(path, &report.tables[0].to_csv())?;
            Ok(vec![path.to_path_buf()])
        }
        (Format::Csv, Some(path)) => report
            .tables
            .iter()
            .map(|t| {
                let p = table_path(path, &t.name);
                write_file(&p, &t.to_csv())?;
                Ok(p)
            })
            .collect(),
        (format, None) => {
            let bytes = match format {
                Format::Json => report.to_json().into_bytes(),
                Format::Csv => report.to_csv_stream(),
            };
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io("<stdout>", e))?;
            Ok(vec![])
        }
    }
}

/// Filesystem-friendly name such as `posnormal_1_0.25` for `posnormal(1,0.25)`.
pub fn slug(label: &str) -> String {
    let mut s = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
            s.push(c);
        } else if !s.ends_with('_') {
            s.push('_');
        }
    }
    s.trim_matches('_').to_owned()
}
