//! Result tables and their CSV / JSON serialization.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Format, Mode};
use crate::CliError;

/// Named numeric columns plus `key: value` notes for the header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    /// File stem, unique within one run.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub notes: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width differs from header");
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn note_value(&self, key: &str) -> Option<&str> {
        self.notes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Seventeen significant digits, so every `f64` round-trips.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Compact label for a parameter in a file name: `10`, `0.5`.
pub fn label(v: f64) -> String {
    format!("{v}")
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Provenance shared by every table of one run.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub mode: Mode,
    pub resolved_config: String,
    pub timestamp: bool,
}

impl Provenance {
    pub fn config_hash(&self) -> String {
        sha256_hex(&self.resolved_config)
    }

    fn header(&self, table: &ResultTable) -> String {
        let mut h = String::new();
        let _ = writeln!(h, "# oscspin {}", self.mode);
        let _ = writeln!(h, "# version: oscspin-core {}", oscspin_core::VERSION);
        let _ = writeln!(h, "# config_sha256: {}", self.config_hash());
        if self.timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let _ = writeln!(h, "# generated_unix: {secs}");
        }
        for (k, v) in &table.notes {
            let _ = writeln!(h, "# {k}: {v}");
        }
        let _ = writeln!(h, "# config:");
        for line in self.resolved_config.lines() {
            let _ = writeln!(h, "#   {line}");
        }
        h
    }

    pub fn to_csv(&self, table: &ResultTable) -> String {
        let mut out = self.header(table);
        out.push_str(&table.columns.join(","));
        out.push('\n');
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, table: &ResultTable) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            mode: String,
            version: &'a str,
            config_sha256: String,
            config: &'a str,
            notes: &'a [(String, String)],
            columns: &'a [String],
            rows: Vec<Vec<String>>,
        }
        let doc = Doc {
            mode: self.mode.to_string(),
            version: oscspin_core::VERSION,
            config_sha256: self.config_hash(),
            config: &self.resolved_config,
            notes: &table.notes,
            columns: &table.columns,
            rows: table
                .rows
                .iter()
                .map(|r| r.iter().map(|v| format_number(*v)).collect())
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    /// Writes every table in the requested formats; returns the paths.
    pub fn write_all(&self, dir: &Path, tables: &[ResultTable], format: Format) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        for t in tables {
            if matches!(format, Format::Csv | Format::Both) {
                let p = dir.join(format!("{}.csv", t.name));
                fs::write(&p, self.to_csv(t)).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                written.push(p);
            }
            if matches!(format, Format::Json | Format::Both) {
                let p = dir.join(format!("{}.json", t.name));
                fs::write(&p, self.to_json(t)).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                written.push(p);
            }
        }
        Ok(written)
    }
}
