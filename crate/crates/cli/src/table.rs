//! Flat result tables and their CSV / JSONL encodings.
//!
//! Floats are written with 17 significant digits in CSV and in the shortest
//! round-tripping form in JSON; non-finite floats become the strings `inf`,
//! `-inf` and `NaN` in both.

use std::cmp::Ordering;
use std::io::{BufRead, Write};

use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn rank(&self) -> u8 {
        match self {
            Cell::Int(_) => 0,
            Cell::Float(_) => 1,
            Cell::Text(_) => 2,
            Cell::Bool(_) => 3,
        }
    }

    /// Total order used for canonical row sorting.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cell::Int(a), Cell::Int(b)) => a.cmp(b),
            (Cell::Float(a), Cell::Float(b)) => a.total_cmp(b),
            (Cell::Int(a), Cell::Float(b)) => (*a as f64).total_cmp(b),
            (Cell::Float(a), Cell::Int(b)) => a.total_cmp(&(*b as f64)),
            (Cell::Text(a), Cell::Text(b)) => a.cmp(b),
            (Cell::Bool(a), Cell::Bool(b)) => a.cmp(b),
            (a, b) => a.rank().cmp(&b.rank()),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Float(x) => non_finite(*x).to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Float(x) if x.is_finite() => Value::from(*x),
            Cell::Float(x) => Value::from(non_finite(*x)),
            Cell::Bool(b) => Value::from(*b),
            Cell::Text(s) => Value::from(s.clone()),
        }
    }

    fn from_json(v: &Value) -> Option<Self> {
        match v {
            Value::Bool(b) => Some(Cell::Bool(*b)),
            Value::Number(n) => n.as_i64().map(Cell::Int).or_else(|| n.as_f64().map(Cell::Float)),
            Value::String(s) => Some(match s.as_str() {
                "inf" => Cell::Float(f64::INFINITY),
                "-inf" => Cell::Float(f64::NEG_INFINITY),
                "NaN" => Cell::Float(f64::NAN),
                _ => Cell::Text(s.clone()),
            }),
            _ => None,
        }
    }
}

fn non_finite(x: f64) -> &'static str {
    if x.is_nan() {
        "NaN"
    } else if x > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(i64::try_from(x).expect("count fits i64"))
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Float(x.unwrap_or(f64::NAN))
    }
}

/// Rows sorted by their first `key_len` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub key_len: usize,
    pub rows: Vec<Vec<Cell>>,
}

/// Run identity stamped into every output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stamp {
    pub config_hash: String,
    pub seed: u64,
}

impl Table {
    pub fn new(name: &str, columns: &[&str], key_len: usize) -> Self {
        assert!(key_len <= columns.len());
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            key_len,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn canonicalize(&mut self) {
        let k = self.key_len;
        self.rows.sort_by(|a, b| {
            a[..k]
                .iter()
                .zip(&b[..k])
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        });
    }

    pub fn write_csv<W: Write>(&self, stamp: &Stamp, mut w: W) -> CliResult<()> {
        writeln!(w, "# config_hash={} seed={}", stamp.config_hash, stamp.seed)?;
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, stamp: &Stamp, mut w: W) -> CliResult<()> {
        for row in &self.rows {
            let mut obj = Map::new();
            obj.insert("config_hash".into(), Value::from(stamp.config_hash.clone()));
            obj.insert("seed".into(), Value::from(stamp.seed));
            obj.insert("table".into(), Value::from(self.name.clone()));
            for (c, v) in self.columns.iter().zip(row) {
                obj.insert(c.clone(), v.json());
            }
            serde_json::to_writer(&mut w, &obj).map_err(|e| CliError::Io(e.into()))?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// Rows of a JSONL file written by [`Table::write_jsonl`], read against
    /// this table's columns.
    pub fn read_jsonl<R: BufRead>(&self, r: R) -> CliResult<Vec<Vec<Cell>>> {
        let mut rows = Vec::new();
        for line in r.lines() {
            let line = line?;
            let obj: Map<String, Value> = serde_json::from_str(&line).map_err(|e| CliError::Io(e.into()))?;
            let row = self
                .columns
                .iter()
                .map(|c| {
                    obj.get(c)
                        .and_then(Cell::from_json)
                        .ok_or_else(|| CliError::Numeric(format!("column {c} missing from JSONL record")))
                })
                .collect::<CliResult<Vec<Cell>>>()?;
            rows.push(row);
        }
        Ok(rows)
    }
}
