//! Result files: CSV tables, a JSON summary, and the run manifest.
//!
//! Every file is written to a temporary sibling and renamed into place, so
//! a reader never sees a partial file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Version of the CSV and JSON layouts, recorded in the manifest.
pub const SCHEMA_VERSION: u32 = 1;

/// A CSV cell. Reals use the shortest representation that round-trips,
/// always with `.` as the decimal separator.
pub enum Cell {
    Int(u64),
    Real(f64),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format!("{v:?}"),
        }
    }
}

/// An in-memory table destined for one CSV file.
pub struct Table {
    pub name: String,
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> std::io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<OutputRecord> {
    let mut tmp = tempfile::Builder::new().prefix(".netinf-").tempfile_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(OutputRecord {
        file: name.to_string(),
        bytes: bytes.len() as u64,
        sha256: sha256_hex(bytes),
    })
}

/// Everything written by one run, plus its manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutputs {
    pub dir: PathBuf,
    pub files: Vec<OutputRecord>,
    pub manifest: PathBuf,
}

#[derive(Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub schema_version: u32,
    pub artifact_version: &'static str,
    pub experiment: &'a str,
    pub seed: u64,
    pub threads: usize,
    pub config: &'a C,
    pub wall_time_seconds: f64,
    pub outputs: &'a [OutputRecord],
}

pub fn ensure_dir(dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rendering() {
        let mut t = Table::new("x", &["T", "value"]);
        t.push(vec![3usize.into(), 0.1.into()]);
        t.push(vec![4usize.into(), 1e-20.into()]);
        t.push(vec![5usize.into(), 1.0.into()]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "T,value\n3,0.1\n4,1e-20\n5,1.0\n");
    }

    #[test]
    fn atomic_write_and_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let rec = write_atomic(dir.path(), "a.txt", b"abc").unwrap();
        assert_eq!(fs::read(dir.path().join("a.txt")).unwrap(), b"abc");
        assert_eq!(
            rec.sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }
}
