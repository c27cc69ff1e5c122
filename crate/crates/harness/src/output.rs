//! Result tables and their CSV form.

use std::path::{Path, PathBuf};

use farrow_sync::metrics::fmt_f64;

use crate::HarnessError;

/// A named table of string cells with a mandatory header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width of {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cell `name` of `row` parsed as a float.
    pub fn value(&self, row: usize, name: &str) -> Option<f64> {
        let c = self.column(name)?;
        self.rows.get(row)?.get(c)?.parse().ok()
    }

    pub fn cell(&self, row: usize, name: &str) -> Option<&str> {
        let c = self.column(name)?;
        self.rows.get(row)?.get(c).map(String::as_str)
    }

    /// Indices of rows whose cells equal every `(column, value)` pair.
    pub fn find(&self, keys: &[(&str, &str)]) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&r| keys.iter().all(|(k, v)| self.cell(r, k) == Some(*v)))
            .collect()
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| HarnessError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Io(e.to_string()))
    }
}

/// Tables produced by one experiment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    /// Cells that raised an error; they are recorded in the tables too.
    pub failed_cells: usize,
    pub warnings: Vec<String>,
    /// Extra non-CSV files, `(file name, contents)`.
    pub files: Vec<(String, String)>,
}

impl ExperimentOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        for t in &self.tables {
            let p = dir.join(format!("{}.csv", t.name));
            std::fs::write(&p, t.to_csv()?).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))?;
            written.push(p);
        }
        for (name, text) in &self.files {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))?;
            written.push(p);
        }
        Ok(written)
    }
}

pub fn f(v: f64) -> String {
    fmt_f64(v)
}

pub fn u<T: ToString>(v: T) -> String {
    v.to_string()
}
