//! CSV artifacts and run manifests.
//!
//! Tables are RFC 4180 CSV in UTF-8 with `.` as decimal separator; floats
//! use the shortest representation that parses back to the same `f64`.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::CliError;

/// Column layouts of every published table.
pub mod schema {
    pub const DATASET: &[&str] = &["x0", "x1", "label"];
    pub const ACCURACY: &[&str] = &["seed", "n_qubits", "circuit_kind", "train_acc", "test_acc"];
    pub const CLASSIFY: &[&str] = &["x0", "x1", "label", "readout", "prediction"];
    pub const SURFACE: &[&str] = &["x0", "x1", "z"];
    pub const TRACE: &[&str] = &["iter", "loss", "grad_norm"];
    pub const FIT: &[&str] = &["x", "target", "prediction"];
    pub const TRAJECTORY: &[&str] = &["step", "input", "target", "prediction", "mode"];
    pub const PHASE: &[&str] = &["source", "x", "x_delayed"];
    pub const CAPACITY: &[&str] = &["delay", "capacity"];
    pub const SERIES: &[&str] = &["step", "t", "value"];
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    UInt(u64),
    Float(f64),
    Text(&'static str),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::UInt(u) => u.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => (*s).to_owned(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(i64::try_from(v).expect("count fits in i64"))
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<u8> for Cell {
    fn from(v: u8) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<&'static str> for Cell {
    fn from(v: &'static str) -> Self {
        Cell::Text(v)
    }
}

/// Shortest decimal form of `v` that parses back to the same value, with an
/// exponent for very large or small magnitudes.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

/// A named table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, header: &'static [&'static str]) -> Self {
        Table { name, header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(self.file_name());
        fs::write(&path, self.to_csv_bytes()).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Writes the tables and `manifest.json` into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, tables: &[Table], manifest: &Value) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = tables.iter().map(|t| t.write_to(dir)).collect::<Result<Vec<_>, _>>()?;
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_in_shortest_form() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 1.0, f64::MIN_POSITIVE, 0.30000000000000004] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(1.0), "1.0");
        assert_eq!(format_float(-0.5), "-0.5");
        assert_eq!(format_float(1e-300), "1e-300");
    }

    #[test]
    fn table_renders_rfc4180() {
        let mut t = Table::new("series", schema::SERIES);
        t.push(vec![0usize.into(), Cell::Empty, 0.25.into()]);
        t.push(vec![1usize.into(), Some(0.02).into(), (-1.0).into()]);
        assert_eq!(String::from_utf8(t.to_csv_bytes()).unwrap(), "step,t,value\r\n0,,0.25\r\n1,0.02,-1.0\r\n");
    }
}
