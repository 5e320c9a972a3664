//! File formats.
//!
//! Tabular outputs are written as CSV or as a JSON array of records with the
//! same field names. Readers accept either, sniffing a leading `[`.

pub mod iot;
pub mod records;
pub mod series;

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

pub fn read_to_string(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn is_json(text: &str) -> bool {
    text.trim_start().starts_with('[')
}

pub fn read_records<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let text = read_to_string(path)?;
    if is_json(&text) {
        return serde_json::from_str(&text).map_err(|e| {
            CliError::malformed(path, e.to_string())
                .with_details(serde_json::json!({ "path": path.display().to_string(), "line": e.line() }))
        });
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    rdr.deserialize().map(|r| r.map_err(|e| CliError::csv(path, e))).collect()
}

pub fn records_to_bytes<T: Serialize>(records: &[T], format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(r).expect("in-memory CSV write");
            }
            w.into_inner().expect("in-memory CSV flush")
        }
        OutputFormat::Json => {
            let mut out = serde_json::to_vec_pretty(records).expect("serializable records");
            out.push(b'\n');
            out
        }
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| output_error(path, e))?;
    f.write_all(bytes).map_err(|e| output_error(path, e))
}

fn output_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::new("output_error", crate::error::exit::INPUT, format!("{}: {e}", path.display()))
        .with_details(serde_json::json!({ "path": path.display().to_string() }))
}

pub fn write_records<T: Serialize>(path: &Path, records: &[T], format: OutputFormat) -> CliResult<()> {
    write_bytes(path, &records_to_bytes(records, format))
}
