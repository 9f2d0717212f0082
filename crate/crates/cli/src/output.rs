use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::CliError;

/// 17 significant digits, round-trip safe.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A table destined for one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Table {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Output {
    pub tables: Vec<Table>,
    /// Extra JSON documents (file name, content).
    pub documents: Vec<(String, Value)>,
    pub summary: serde_json::Map<String, Value>,
    /// Errors that did not stop the command.
    pub failures: Vec<CliError>,
}

pub fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), content).map_err(|e| CliError::Io(format!("{}: {e}", dir.join(name).display())))
}
