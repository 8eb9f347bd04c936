//! Atomic output files and the run manifest.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

/// One file produced by a command, held in memory until the run succeeds.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
    /// Data rows for CSV files.
    pub rows: Option<usize>,
}

impl OutputFile {
    pub fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("results serialize");
        bytes.push(b'\n');
        Self { name: name.into(), bytes, rows: None }
    }

    pub fn csv<T: Serialize>(name: &str, rows: &[T]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).expect("rows serialize");
        }
        Self { name: name.into(), bytes: w.into_inner().expect("in-memory writer"), rows: Some(rows.len()) }
    }

    pub fn text(name: &str, text: String) -> Self {
        Self { name: name.into(), bytes: text.into_bytes(), rows: None }
    }

    pub fn binary(name: &str, bytes: Vec<u8>) -> Self {
        Self { name: name.into(), bytes, rows: None }
    }
}

/// Everything a command produced, plus what the manifest records about it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Effective configuration after command-line overrides.
    pub config: serde_json::Value,
    pub seed: u64,
    pub files: Vec<OutputFile>,
    /// Short human-readable lines for stdout.
    pub report: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub artifact: &'static str,
    pub artifact_version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::config(format!("output {}: {e}", dir.join(name).display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(dir.join(name)).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn write_run(out: &Path, command: &str, result: RunResult, start: Instant) -> Result<Vec<String>, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::config(format!("output {}: {e}", out.display())))?;
    let mut entries = Vec::with_capacity(result.files.len());
    for f in &result.files {
        write_atomic(out, &f.name, &f.bytes)?;
        entries.push(ManifestEntry { file: f.name.clone(), sha256: sha256_hex(&f.bytes), bytes: f.bytes.len(), rows: f.rows });
    }
    let config_bytes = serde_json::to_vec(&result.config).expect("config serializes");
    let manifest = RunManifest {
        artifact: "bildsim",
        artifact_version: env!("CARGO_PKG_VERSION"),
        command: command.into(),
        config_hash: sha256_hex(&config_bytes),
        seed: result.seed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        outputs: entries,
    };
    let manifest = OutputFile::json(MANIFEST, &manifest);
    write_atomic(out, MANIFEST, &manifest.bytes)?;
    let mut lines = result.report;
    lines.extend(result.files.iter().map(|f| format!("wrote {}", out.join(&f.name).display())));
    lines.push(format!("wrote {}", out.join(MANIFEST).display()));
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a.txt", b"one").unwrap();
        write_atomic(dir.path(), "a.txt", b"two").unwrap();
        assert_eq!(std::fs::read(dir.path().join("a.txt")).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn csv_rows_are_counted() {
        #[derive(Serialize)]
        struct Row {
            a: f64,
            b: Option<f64>,
        }
        let f = OutputFile::csv("t.csv", &[Row { a: 1.5, b: None }, Row { a: 2.0, b: Some(0.25) }]);
        assert_eq!(f.rows, Some(2));
        assert_eq!(String::from_utf8(f.bytes).unwrap(), "a,b\n1.5,\n2.0,0.25\n");
    }
}
