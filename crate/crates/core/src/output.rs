//! Deterministic tabular and JSON output.

use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};

/// Nine significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else {
        v.to_string()
    }
}

/// Rounds to nine significant digits so JSON numbers print stably.
pub fn sig9(v: f64) -> f64 {
    if v.is_finite() {
        fmt_f64(v).parse().unwrap_or(v)
    } else {
        v
    }
}

/// JSON number rounded to nine significant digits; non-finite values map to
/// `null`.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(sig9(v)).map_or(Value::Null, Value::Number)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Text(v.to_string())
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

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(s) => s.parse().ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Render(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Render(e.to_string()))
    }

    /// Parses CSV text; cells that read as numbers become numeric.
    pub fn from_csv(name: &str, text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let columns = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(
                rec?.iter()
                    .map(|s| match s.parse::<f64>() {
                        Ok(v) if s.contains(['e', '.']) || s == "NaN" || s.ends_with("inf") => Cell::Num(v),
                        _ => Cell::Text(s.to_string()),
                    })
                    .collect(),
            );
        }
        Ok(Self { name: name.into(), columns, rows })
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(k, c)| {
                        let v = match c {
                            Cell::Num(x) => num(*x),
                            Cell::Text(s) => Value::String(s.clone()),
                        };
                        (k.clone(), v)
                    })
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// Everything one command produces.
#[derive(Debug, Clone, Default)]
pub struct ResultBundle {
    pub command: String,
    pub inputs: Value,
    pub tables: Vec<Table>,
    pub json: Option<Value>,
    pub figures: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(format!("unknown format `{s}` (csv, json, svg)")),
        }
    }
}

impl ResultBundle {
    pub fn new(command: &str, inputs: Value) -> Self {
        Self { command: command.into(), inputs, ..Default::default() }
    }

    /// JSON document: the explicit result if any, otherwise the tables.
    pub fn json_document(&self) -> Value {
        if let Some(j) = &self.json {
            return j.clone();
        }
        let mut m = serde_json::Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("inputs".into(), self.inputs.clone());
        for t in &self.tables {
            m.insert(t.name.clone(), t.to_json());
        }
        Value::Object(m)
    }

    /// Writes each table and figure into `dir`, returning the paths written.
    pub fn write_dir(&self, dir: &Path, formats: &[Format]) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for f in formats {
            match f {
                Format::Csv => {
                    for t in &self.tables {
                        let p = dir.join(format!("{}.csv", t.name));
                        std::fs::write(&p, t.to_csv()?)?;
                        written.push(p);
                    }
                }
                Format::Json => {
                    let p = dir.join(format!("{}.json", self.command));
                    let text = serde_json::to_string_pretty(&self.json_document())
                        .map_err(|e| Error::Render(e.to_string()))?;
                    std::fs::write(&p, text + "\n")?;
                    written.push(p);
                }
                Format::Svg => {
                    for (name, svg) in &self.figures {
                        let p = dir.join(format!("{name}.svg"));
                        std::fs::write(&p, svg)?;
                        written.push(p);
                    }
                }
            }
        }
        Ok(written)
    }
}
