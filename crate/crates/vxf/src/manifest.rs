//! Run manifests: what went in, with which parameters, and what came out.
//!
//! A manifest holds no timestamps or host details, so an identical run
//! yields a byte-identical manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{exit, CliError, CliResult};

pub const TOOL: &str = "vxf";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, without `--manifest`.
    pub args: Vec<String>,
    pub params: Map<String, Value>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub exit: u8,
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn digests(paths: &[PathBuf]) -> CliResult<Vec<FileDigest>> {
    paths
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

impl RunManifest {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("serializable manifest");
        out.push(b'\n');
        out
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = crate::io::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::malformed(path, e.to_string()))
    }

    pub fn render(&self) -> String {
        let mut s = format!("{} {} {}\n", self.tool, self.version, self.command);
        s.push_str(&format!("args: {}\n", self.args.join(" ")));
        s.push_str("params:\n");
        for (k, v) in &self.params {
            s.push_str(&format!("  {k} = {v}\n"));
        }
        for (title, files) in [("inputs", &self.inputs), ("outputs", &self.outputs)] {
            s.push_str(&format!("{title}:\n"));
            for f in files {
                s.push_str(&format!("  {}  {}\n", f.sha256, f.path));
            }
        }
        s.push_str(&format!("exit: {}\n", self.exit));
        s
    }
}

/// Files whose current digest differs from the recorded one (or that are
/// missing), as `(path, recorded, current)`.
pub fn mismatches(files: &[FileDigest]) -> Vec<(String, String, Option<String>)> {
    files
        .iter()
        .filter_map(|f| {
            let current = sha256_file(Path::new(&f.path)).ok();
            (current.as_deref() != Some(f.sha256.as_str())).then(|| (f.path.clone(), f.sha256.clone(), current))
        })
        .collect()
}

pub fn mismatch_error(code: &'static str, what: &str, bad: &[(String, String, Option<String>)]) -> CliError {
    let list: Vec<Value> = bad
        .iter()
        .map(|(p, want, got)| serde_json::json!({ "path": p, "recorded": want, "current": got }))
        .collect();
    let names: Vec<&str> = bad.iter().map(|b| b.0.as_str()).collect();
    CliError::new(code, exit::VALIDATION, format!("{what} differ from the manifest: {}", names.join(", ")))
        .with_details(serde_json::json!({ "files": list }))
}
