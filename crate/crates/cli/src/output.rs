//! Tables written as CSV or JSON into the output directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::ValueEnum;
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
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

/// Round-trip exact: 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) => Value::Null,
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    /// `(name, unit)`.
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[(&'static str, &'static str)]) -> Self {
        Self { name: name.to_string(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = Cell>>(&mut self, row: I) {
        let row: Vec<Cell> = row.into_iter().collect();
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| Cell::Num(v)));
    }
}

/// A `quantity, value, unit` table.
#[derive(Debug, Clone, Default)]
pub struct Report {
    rows: Vec<(String, Cell, String)>,
}

impl Report {
    pub fn add(&mut self, key: &str, value: impl Into<Cell>, unit: &str) {
        self.rows.push((key.to_string(), value.into(), unit.to_string()));
    }

    pub fn into_table(self, name: &str) -> Table {
        let mut t = Table::new(name, &[("quantity", "-"), ("value", "-"), ("unit", "-")]);
        for (k, v, u) in self.rows {
            t.push([Cell::Text(k), v, Cell::Text(u)]);
        }
        t
    }
}

pub struct Output {
    pub dir: PathBuf,
    pub format: Format,
    pub timestamp: bool,
    pub command: String,
    pub digest: String,
    pub written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, format: Format, timestamp: bool, command: &str, digest: String) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), format, timestamp, command: command.to_string(), digest, written: Vec::new() })
    }

    fn generated() -> u64 {
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
    }

    pub fn table(&mut self, table: &Table) -> Result<PathBuf, CliError> {
        let (path, text) = match self.format {
            Format::Csv => (self.dir.join(format!("{}.csv", table.name)), self.csv(table)),
            Format::Json => (self.dir.join(format!("{}.json", table.name)), self.json(table)),
        };
        fs::write(&path, text)?;
        self.written.push(path.clone());
        Ok(path)
    }

    fn csv(&self, table: &Table) -> String {
        let mut s = format!("# curved2body {} config-sha256={}\n", self.command, self.digest);
        if self.timestamp {
            s.push_str(&format!("# generated unix-time={}\n", Self::generated()));
        }
        let header: Vec<String> = table.columns.iter().map(|(n, u)| format!("{n} [{u}]")).collect();
        s.push_str(&header.join(","));
        s.push('\n');
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn json(&self, table: &Table) -> String {
        let mut v = json!({
            "command": self.command,
            "config_sha256": self.digest,
            "table": table.name,
            "columns": table.columns.iter().map(|(n, u)| json!({"name": n, "unit": u})).collect::<Vec<_>>(),
            "rows": table.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        });
        if self.timestamp {
            v["generated_unix_time"] = json!(Self::generated());
        }
        let mut s = serde_json::to_string_pretty(&v).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.written.push(path.clone());
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_quotes_text() {
        assert_eq!(Cell::from("a,b").csv(), "\"a,b\"");
        assert_eq!(Cell::from("plain").csv(), "plain");
    }
}
