use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::{CliError, CliResult};

pub const PROBABILITY_DIGITS: usize = 12;
pub const ENHANCEMENT_DIGITS: usize = 6;

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// Probabilities below `zero_below` are numerical zeros and are written as 0.
pub fn probability(x: f64, zero_below: f64) -> Cell {
    if x.abs() < zero_below {
        Cell::Real(0.0)
    } else {
        Cell::Real(round_sig(x, PROBABILITY_DIGITS))
    }
}

/// Enhancement ratio, written as 0 when the probability itself is a numerical zero.
pub fn enhancement(x: Option<f64>, probability: f64, zero_below: f64) -> Cell {
    match x {
        None => Cell::Missing,
        Some(_) if probability.abs() < zero_below => Cell::Real(0.0),
        Some(x) => Cell::Real(round_sig(x, ENHANCEMENT_DIGITS)),
    }
}

fn real_to_csv(x: f64) -> String {
    let magnitude = x.abs();
    if x == 0.0 || (1e-5..1e15).contains(&magnitude) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// One value shared by the JSON and CSV encodings.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Real(f64),
    Flag(bool),
    Missing,
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(i) => Value::from(*i),
            Cell::Real(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Flag(b) => Value::Bool(*b),
            Cell::Missing => Value::Null,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => real_to_csv(*x),
            Cell::Flag(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Metadata plus a table of rows. JSON nests the rows under `rows_key`; CSV
/// carries only the table.
#[derive(Debug, Clone)]
pub struct Report {
    pub meta: Map<String, Value>,
    pub rows_key: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(rows_key: &'static str, header: Vec<&'static str>) -> Self {
        Report {
            meta: Map::new(),
            rows_key,
            header,
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_json(&self) -> Value {
        let mut doc = self.meta.clone();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let object: Map<String, Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.to_string(), v.to_json()))
                    .collect();
                Value::Object(object)
            })
            .collect();
        doc.insert(self.rows_key.to_string(), Value::Array(rows));
        Value::Object(doc)
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::to_csv))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => {
                let mut text = serde_json::to_string_pretty(&self.to_json())
                    .expect("report values are always serialisable");
                text.push('\n');
                Ok(text)
            }
            Format::Csv => self.to_csv(),
        }
    }
}

pub fn emit(report: &Report, format: Format, path: Option<&Path>) -> CliResult<()> {
    let text = report.render(format)?;
    match path {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            match stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                }),
            }
        }
    }
}
