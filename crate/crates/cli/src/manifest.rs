//! Run manifests and digest-tracked output files.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Path relative to the manifest's directory (absolute for inputs elsewhere).
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub parameters: Value,
    pub started_at: String,
    pub finished_at: String,
    #[serde(default)]
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects the data files a command writes so the manifest can list their digests.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<FileDigest>,
    inputs: Vec<FileDigest>,
}

impl OutputSet {
    pub fn new(dir: impl Into<PathBuf>) -> CliResult<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, files: Vec::new(), inputs: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(FileDigest { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
    }

    /// Writes `manifest_name` last, after every data file.
    pub fn finish(
        self,
        manifest_name: &str,
        command: &str,
        parameters: Value,
        started_at: String,
    ) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            parameters,
            started_at,
            finished_at: now(),
            inputs: self.inputs,
            outputs: self.files,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(self.dir.join(manifest_name), text)?;
        Ok(manifest)
    }
}

/// Directory and file name of a single-file `--out` target.
pub fn split_out(path: &Path) -> (PathBuf, String) {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    (dir, name)
}

/// Manifest name for a single-file output: `sweep.csv` → `sweep.manifest.json`.
pub fn manifest_name_for(file_name: &str) -> String {
    let stem = Path::new(file_name).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{stem}.manifest.json")
}
