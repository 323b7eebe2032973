//! CSV emission. Every file is comma-separated ASCII with a header row,
//! LF line endings and 17 significant digits per value, so reading a file
//! back returns the exact doubles that were written.

use frte_core::ap_solver::Snapshot;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
#[error("{path}: {message}")]
pub struct OutputError {
    pub path: PathBuf,
    pub message: String,
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

fn render(cell: &Cell) -> String {
    match cell {
        Cell::Float(v) => format!("{v:.16e}"),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

/// A header plus rows of equal width.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header");
        self.rows.push(row);
    }
}

pub fn write_csv(table: &Table, path: &Path) -> Result<(), OutputError> {
    let fail = |e: &dyn std::fmt::Display| OutputError { path: path.to_path_buf(), message: e.to_string() };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| fail(&e))?;
    w.write_record(&table.header).map_err(|e| fail(&e))?;
    for row in &table.rows {
        w.write_record(row.iter().map(render)).map_err(|e| fail(&e))?;
    }
    w.flush().map_err(|e| fail(&e))
}

/// Reads a CSV written by [`write_csv`] back as numbers; empty cells are NaN.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), OutputError> {
    let fail = |e: &dyn std::fmt::Display| OutputError { path: path.to_path_buf(), message: e.to_string() };
    let mut r = csv::Reader::from_path(path).map_err(|e| fail(&e))?;
    let header = r.headers().map_err(|e| fail(&e))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| fail(&e))?;
        let row = record
            .iter()
            .map(|s| if s.is_empty() { Ok(f64::NAN) } else { s.parse::<f64>() })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| fail(&e))?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// `x, T, T_r, rho_g1..rho_gG` at cell centres.
pub fn profile_table(centers: &[f64], snap: &Snapshot) -> Table {
    let n = centers.len();
    let groups = snap.rho.len() / n;
    let header = ["x".to_string(), "T".into(), "T_r".into()]
        .into_iter()
        .chain((1..=groups).map(|g| format!("rho_g{g}")));
    let mut table = Table::new(header);
    for j in 0..n {
        let mut row: Vec<Cell> = vec![centers[j].into(), snap.t[j].into(), snap.t_r[j].into()];
        row.extend((0..groups).map(|g| Cell::Float(snap.rho[g * n + j])));
        table.push(row);
    }
    table
}

/// Time label of a profile file name: shortest decimal that rounds to the
/// time at 1e-9 ns.
pub fn time_label(time: f64) -> String {
    let s = format!("{:.9}", time);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" { "0".into() } else { s.to_string() }
}

pub fn profile_path(dir: &Path, tag: &str, time: f64) -> PathBuf {
    dir.join(format!("{tag}_profile_t{}.csv", time_label(time)))
}
