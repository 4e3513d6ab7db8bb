//! CSV and JSON files with a provenance line.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::CliError;
use crate::simulator::Estimate;

/// Writes files into one output directory, stamping each with the same
/// provenance line.
pub struct OutDir {
    dir: PathBuf,
    provenance: String,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(dir: &Path, config_sha256: &str, seed: u64) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(&dir, e))?;
        let provenance = format!("# sap-lab {} config_sha256={config_sha256} seed={seed}", env!("CARGO_PKG_VERSION"));
        Ok(Self { dir: dir.to_path_buf(), provenance, written: Vec::new() })
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Start a CSV file with the provenance line and `header`.
    pub fn csv(&mut self, name: &str, header: &[&str]) -> Result<CsvFile, CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{}", self.provenance).map_err(|e| CliError::io(&path, e))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header).map_err(|e| CliError::Csv { path: path.clone(), source: e })?;
        self.written.push(path.clone());
        Ok(CsvFile { w, path, width: header.len() })
    }

    pub fn json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).expect("report serialises");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }
}

pub struct CsvFile {
    w: csv::Writer<BufWriter<File>>,
    path: PathBuf,
    width: usize,
}

/// One CSV cell.
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::U(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => format!("{x}"),
            Cell::U(x) => x.to_string(),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl CsvFile {
    pub fn row(&mut self, cells: Vec<Cell>) -> Result<(), CliError> {
        assert_eq!(cells.len(), self.width, "row width for {}", self.path.display());
        let rendered: Vec<String> = cells.iter().map(Cell::render).collect();
        self.w.write_record(&rendered).map_err(|e| CliError::Csv { path: self.path.clone(), source: e })
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.w.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// `value, ci_low, ci_high, trials` cells of an estimate scaled by `k`.
pub fn estimate_cells(e: &Estimate, k: f64) -> [Cell; 4] {
    [Cell::F(e.mean * k), Cell::F(e.ci_low * k), Cell::F(e.ci_high * k), Cell::U(e.trials)]
}
