//! Output directory bookkeeping. The manifest is rewritten after every
//! artifact, flagged incomplete until the run finishes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{ErrorRecord, RunError};
use crate::spec::RunSpec;

pub const MANIFEST: &str = "manifest.json";
pub const ERROR_RECORD: &str = "error.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub complete: bool,
    pub spec: RunSpec,
    pub seeds: Vec<u64>,
    pub files: Vec<FileEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes artifacts into the output directory and keeps the manifest
/// current.
pub struct Outputs {
    dir: PathBuf,
    pub manifest: Manifest,
}

impl Outputs {
    pub fn create(spec: &RunSpec) -> Result<Self, RunError> {
        fs::create_dir_all(&spec.out).map_err(|e| RunError::io(&spec.out, e))?;
        // A stale error record from an earlier run would be misleading.
        let stale = spec.out.join(ERROR_RECORD);
        if stale.exists() {
            fs::remove_file(&stale).map_err(|e| RunError::io(&stale, e))?;
        }
        let out = Outputs {
            dir: spec.out.clone(),
            manifest: Manifest {
                tool: "washboard",
                version: env!("CARGO_PKG_VERSION"),
                complete: false,
                spec: spec.clone(),
                seeds: Vec::new(),
                files: Vec::new(),
                wall_time_s: None,
                error: None,
            },
        };
        out.flush()?;
        Ok(out)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn write_raw(&self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| RunError::io(path, e))
    }

    fn flush(&self) -> Result<(), RunError> {
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        self.write_raw(MANIFEST, text.as_bytes())
    }

    /// Write an artifact and record its hash.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        self.write_raw(name, bytes)?;
        self.manifest.files.push(FileEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        self.flush()
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(mut self, wall_time_s: f64) -> Result<Manifest, RunError> {
        self.manifest.complete = true;
        self.manifest.wall_time_s = Some(wall_time_s);
        self.flush()?;
        Ok(self.manifest)
    }

    /// Leave the manifest incomplete and drop an error record next to it.
    pub fn fail(mut self, err: &RunError, wall_time_s: f64) {
        let record = ErrorRecord::from(err);
        if let Ok(text) = serde_json::to_string_pretty(&record) {
            let _ = self.write_raw(ERROR_RECORD, text.as_bytes());
        }
        self.manifest.error = Some(record);
        self.manifest.wall_time_s = Some(wall_time_s);
        let _ = self.flush();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
