//! CSV emission: comma separated, header row, LF line ends.

use std::io::Write;
use std::path::Path;

use crate::error::CliError;

/// Header plus rows, all already formatted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn single(header: &[&str], row: Vec<String>) -> Self {
        let mut t = Self::new(header);
        t.rows.push(row);
        t
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut wtr = writer(w);
        wtr.write_record(&self.header)?;
        for row in &self.rows {
            wtr.write_record(row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let f = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.write_to(std::io::BufWriter::new(f))
    }
}

pub fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Shortest text that parses back to the same value.
pub fn num(x: f64) -> String {
    x.to_string()
}
