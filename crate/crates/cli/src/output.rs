//! In-memory results and how they are written out.
//!
//! Everything is rendered to bytes before anything touches the disk, so
//! the written files depend only on the configuration.

use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::config::OutputFormat;
use crate::error::CliError;

/// Version of the CSV layouts; bumped whenever a column changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// One CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem, also the schema name in the comment line.
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Self { name: name.into(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// CSV text: a `# immunolearn <name> v<version>` line, the header, the
    /// rows.
    pub fn render(&self) -> Result<Vec<u8>, CliError> {
        let mut buf = format!("# immunolearn {} v{CSV_SCHEMA_VERSION}\n", self.name).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let io = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record(&self.header).map_err(io)?;
            for row in &self.rows {
                w.write_record(row).map_err(io)?;
            }
            w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        }
        Ok(buf)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub summary: Value,
    pub tables: Vec<Table>,
    /// Failed oracle checks (`verify` only); a non-empty list maps to the
    /// oracle-mismatch exit code after the output is written.
    pub oracle_failures: Vec<String>,
}

impl Output {
    pub fn render_summary(&self) -> Result<Vec<u8>, CliError> {
        let mut s = serde_json::to_vec_pretty(&self.summary).map_err(|e| CliError::Io(e.to_string()))?;
        s.push(b'\n');
        Ok(s)
    }

    /// Writes `summary.json` (always) and one CSV per table (format `csv`)
    /// into `dir`, or prints to stdout when `dir` is `None`.
    pub fn emit(&self, dir: Option<&Path>, format: OutputFormat) -> Result<(), CliError> {
        let io = |what: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", what.display()));
        match dir {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
                let path = dir.join("summary.json");
                std::fs::write(&path, self.render_summary()?).map_err(|e| io(&path, e))?;
                if format == OutputFormat::Csv {
                    for t in &self.tables {
                        let path = dir.join(format!("{}.csv", t.name));
                        std::fs::write(&path, t.render()?).map_err(|e| io(&path, e))?;
                    }
                }
            }
            None => {
                let mut out = std::io::stdout().lock();
                let stdout = Path::new("<stdout>");
                match format {
                    OutputFormat::Json => out.write_all(&self.render_summary()?).map_err(|e| io(stdout, e))?,
                    OutputFormat::Csv if self.tables.is_empty() => {
                        out.write_all(&self.render_summary()?).map_err(|e| io(stdout, e))?
                    }
                    OutputFormat::Csv => {
                        for t in &self.tables {
                            out.write_all(&t.render()?).map_err(|e| io(stdout, e))?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Shortest round-trip decimal form, so tables are reproducible.
pub fn num(x: f64) -> String {
    format!("{x}")
}
