//! Deterministic file output: every float is printed with 17 significant
//! digits and '\n' line endings so re-running a command byte-reproduces
//! its CSVs.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// 17 significant digits: 1 leading + 16 after the decimal point.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct CsvWriter {
    path: PathBuf,
    buf: String,
}

impl CsvWriter {
    pub fn new(dir: &Path, name: &str, header: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&header.join(","));
        buf.push('\n');
        CsvWriter {
            path: dir.join(name),
            buf,
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| fmt17(v)).collect();
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    /// Writes the file and returns its name for the manifest.
    pub fn finish(self) -> Result<String, CliError> {
        let mut f = fs::File::create(&self.path)
            .map_err(|e| CliError::Pipeline(format!("cannot create {}: {e}", self.path.display())))?;
        f.write_all(self.buf.as_bytes())
            .map_err(|e| CliError::Pipeline(format!("cannot write {}: {e}", self.path.display())))?;
        Ok(self
            .path
            .file_name()
            .unwrap()
            .to_string_lossy()
            .into_owned())
    }
}

#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub config: serde_json::Value,
    pub tolerances: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
    /// command-specific scalars (fit results, diagnostics, conserved logs)
    pub report: serde_json::Value,
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<String, CliError> {
    let mut doc = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Pipeline(format!("serialization failed: {e}")))?;
    doc.push('\n');
    let path = dir.join(name);
    fs::write(&path, doc)
        .map_err(|e| CliError::Pipeline(format!("cannot write {}: {e}", path.display())))?;
    Ok(name.to_string())
}

/// Best-effort record of a failed run so partial outputs stay interpretable.
pub fn write_failure_manifest(dir: &Path, command: &str, error: &CliError) {
    let doc = serde_json::json!({
        "command": command,
        "status": "failed",
        "exit_code": error.exit_code(),
        "error": error.to_string(),
    });
    let _ = fs::create_dir_all(dir);
    let _ = fs::write(
        dir.join("failure.json"),
        serde_json::to_string_pretty(&doc).unwrap_or_default() + "\n",
    );
}
