use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Command;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FAILED_MARKER: &str = "FAILED";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub run: Command,
    /// Files read by the run, with digests taken before use.
    pub inputs: Vec<Artifact>,
    pub artifacts: Vec<Artifact>,
    pub results: serde_json::Map<String, serde_json::Value>,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let m: RunManifest =
            serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        anyhow::ensure!(
            m.schema_version == SCHEMA_VERSION,
            "manifest schema version {} is not supported (expected {SCHEMA_VERSION})",
            m.schema_version
        );
        Ok(m)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn digest_file(path: &Path, name: String) -> Result<Artifact> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Artifact {
        path: name,
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

/// Output directory that records a digest for every file written to it.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    pub artifacts: Vec<Artifact>,
    pub inputs: Vec<Artifact>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        for stale in [FAILED_MARKER, MANIFEST_FILE] {
            let p = dir.join(stale);
            if p.exists() {
                fs::remove_file(&p).with_context(|| format!("removing stale {}", p.display()))?;
            }
        }
        Ok(Outputs {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
            inputs: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write `name` from a closure that fills a byte buffer.
    pub fn emit(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut Vec<u8>) -> std::result::Result<(), qstrange::Error>,
    ) -> Result<()> {
        let mut buf = Vec::new();
        fill(&mut buf).with_context(|| format!("rendering {name}"))?;
        self.emit_bytes(name, buf)
    }

    pub fn emit_bytes(&mut self, name: &str, bytes: Vec<u8>) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.retain(|a| a.path != name);
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        let a = digest_file(path, path.display().to_string())?;
        self.inputs.push(a);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
