//! Artifacts (JSON or CSV) and the run manifest written next to them.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Rows for CSV output. `comment` explains the columns and is written as a
/// `#` line above the header.
pub struct Table {
    pub comment: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Report {
    pub json: Value,
    pub table: Option<Table>,
    /// Exit with status 1 after writing (a negative verdict).
    pub negative: bool,
}

impl Report {
    pub fn json(json: Value) -> Self {
        Report {
            json,
            table: None,
            negative: false,
        }
    }
}

pub fn render(report: &Report, command: &str, format: Format) -> Result<Vec<u8>, String> {
    match format {
        Format::Json => {
            let mut body = json!({ "schema": SCHEMA, "command": command });
            if let (Value::Object(dst), Value::Object(src)) = (&mut body, &report.json) {
                for (k, v) in src {
                    dst.insert(k.clone(), v.clone());
                }
            } else {
                body["result"] = report.json.clone();
            }
            let mut out = serde_json::to_vec_pretty(&body).map_err(|e| e.to_string())?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let table = report
                .table
                .as_ref()
                .ok_or_else(|| format!("'{command}' has no CSV form; use --format json"))?;
            let mut out = Vec::new();
            writeln!(out, "# {}", table.comment).map_err(|e| e.to_string())?;
            {
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(&table.header).map_err(|e| e.to_string())?;
                for row in &table.rows {
                    w.write_record(row).map_err(|e| e.to_string())?;
                }
                w.flush().map_err(|e| e.to_string())?;
            }
            Ok(out)
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct Versions {
    pub stabpair_cli: &'static str,
    pub stabpair_core: &'static str,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub schema: u32,
    pub subcommand: String,
    pub argv: Vec<String>,
    pub seed: u64,
    pub samples: u64,
    pub convention: String,
    pub format: Format,
    pub threads: usize,
    pub versions: Versions,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn sidecar_path(out: &Path) -> PathBuf {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn set_wall_time(&mut self, d: Duration) {
        self.wall_time_seconds = d.as_secs_f64();
    }
}

pub fn digest_of(path: &Path, bytes: &[u8]) -> OutputDigest {
    OutputDigest {
        path: path.display().to_string(),
        bytes: bytes.len(),
        sha256: sha256_hex(bytes),
    }
}
