//! CSV and JSON emission.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA: &str = "oscidos/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
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
        Cell::Num(v as f64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // NaN and infinities become null
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

/// A named table; NaN marks a missing entry.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: Vec<Column>) -> Self {
        Self {
            name,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(self.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)))?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::csv))?;
        }
        out.flush()?;
        Ok(())
    }

    fn to_json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Everything a subcommand emits.
#[derive(Debug, Clone)]
pub struct Document {
    pub command: &'static str,
    pub parameters: Value,
    pub tables: Vec<Table>,
    pub extra: Map<String, Value>,
}

impl Document {
    pub fn new(command: &'static str, parameters: Value) -> Self {
        Self {
            command,
            parameters,
            tables: Vec::new(),
            extra: Map::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut tables = Map::new();
        for t in &self.tables {
            tables.insert(t.name.to_string(), t.to_json());
        }
        let mut v = json!({
            "schema": SCHEMA,
            "command": self.command,
            "parameters": self.parameters,
            "tables": tables,
        });
        for (k, x) in &self.extra {
            v[k] = x.clone();
        }
        v
    }

    /// JSON: one document. CSV: the first table; further tables follow
    /// after a blank line, each with its own header.
    pub fn write<W: Write>(&self, mut w: W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, &self.to_json())?;
                w.write_all(b"\n")
            }
            Format::Csv => {
                for (i, t) in self.tables.iter().enumerate() {
                    if i > 0 {
                        w.write_all(b"\n")?;
                    }
                    t.write_csv(&mut w).map_err(std::io::Error::other)?;
                }
                Ok(())
            }
        }
    }
}
