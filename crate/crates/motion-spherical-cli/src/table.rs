//! Tabular artifact writer.
//!
//! Every verb produces one table; this module owns the two on-disk shapes.
//! CSV carries a header row and formats floats with Rust's shortest
//! round-trip `Display`, so re-parsing an artifact reproduces the exact
//! bit pattern.  JSON wraps the same rows as objects under a versioned
//! schema tag.  Output is byte-deterministic for a fixed table.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

pub const SCHEMA: &str = "motion-spherical-cli/1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn display(&self) -> String {
        match self {
            Cell::Int(k) => k.to_string(),
            Cell::Float(x) => format!("{x}"),
            Cell::Text(t) => t.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(k) => serde_json::Value::from(*k),
            Cell::Float(x) => serde_json::Value::from(*x),
            Cell::Text(t) => serde_json::Value::from(t.as_str()),
            Cell::Bool(b) => serde_json::Value::from(*b),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra top-level fields for the JSON shape (ignored by CSV, which
    /// stays a plain rectangular artifact).
    pub meta: Vec<(&'static str, serde_json::Value)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new(), meta: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn with_meta(mut self, key: &'static str, value: serde_json::Value) -> Self {
        self.meta.push((key, value));
        self
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(&mut w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|c| c.display()))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut root = serde_json::Map::new();
        root.insert("schema".into(), SCHEMA.into());
        for (k, v) in &self.meta {
            root.insert((*k).into(), v.clone());
        }
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    obj.insert((*name).into(), cell.json());
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        root.insert("rows".into(), serde_json::Value::Array(rows));
        serde_json::to_writer_pretty(&mut w, &serde_json::Value::Object(root))?;
        writeln!(w)
    }

    pub fn emit(&self, out: Option<&Path>, json: bool) -> io::Result<()> {
        match out {
            Some(path) => {
                let f = File::create(path)?;
                if json {
                    self.write_json(f)
                } else {
                    self.write_csv(f)
                }
            }
            None => {
                let stdout = io::stdout();
                let lock = stdout.lock();
                if json {
                    self.write_json(lock)
                } else {
                    self.write_csv(lock)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_awkward_floats() {
        let mut t = Table::new(&["x", "y"]);
        t.push(vec![Cell::Float(0.1 + 0.2), Cell::Float(1.0 / 3.0)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y"));
        let data = lines.next().unwrap();
        let (a, b) = data.split_once(',').unwrap();
        assert_eq!(a.parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(b.parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn json_carries_meta_and_rows() {
        let mut t = Table::new(&["k"]).with_meta("residual", 0.5.into());
        t.push(vec![Cell::Int(7)]);
        let mut buf = Vec::new();
        t.write_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["residual"], 0.5);
        assert_eq!(v["rows"][0]["k"], 7);
    }
}
