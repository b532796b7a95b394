//! Atomic file writes, checksums and the per-directory run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Hidden sibling used while a file is being written.
pub fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp-{}", std::process::id()))
}

pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<PathBuf> {
    let path = path.as_ref();
    let tmp = temp_path(path);
    std::fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        CliError::io(path, e)
    })?;
    Ok(path.to_path_buf())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<(String, u64)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok((sha256_hex(&bytes), bytes.len() as u64))
}

/// Plain CSV table with a fixed header; reals use the shortest round-trip form, with an exponent at the extremes.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Format(format!("csv buffer: {e}")))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<PathBuf> {
        write_atomic(path, &self.to_bytes()?)
    }
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    /// Path relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub command: String,
    pub arguments: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub code_version: String,
    pub seed: Option<u64>,
    pub start_unix: f64,
    pub end_unix: f64,
    pub artifacts: Vec<ArtifactEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub runs: Vec<RunEntry>,
}

impl RunManifest {
    pub fn path(dir: &Path) -> PathBuf {
        dir.join(MANIFEST_NAME)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = Self::path(dir);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn load_or_default(dir: &Path) -> Result<Self> {
        if Self::path(dir).exists() {
            Self::load(dir)
        } else {
            Ok(Self::default())
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_atomic(Self::path(dir), text.as_bytes())?;
        Ok(())
    }

    /// Every artifact of the most recent run that produced a file of this name.
    pub fn latest(&self, name: &str) -> Option<&ArtifactEntry> {
        self.runs.iter().rev().flat_map(|r| &r.artifacts).find(|a| a.path == name)
    }

    /// Recomputes checksums; returns the paths that are missing or altered.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        let mut bad = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for a in self.runs.iter().rev().flat_map(|r| &r.artifacts) {
            // later runs may legitimately overwrite an artifact
            if !seen.insert(a.path.clone()) {
                continue;
            }
            match sha256_file(dir.join(&a.path)) {
                Ok((sum, _)) if sum == a.sha256 => {}
                _ => bad.push(a.path.clone()),
            }
        }
        bad
    }
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Collects artifacts of one subcommand and appends them to the directory manifest.
pub struct RunRecorder {
    dir: PathBuf,
    entry: RunEntry,
}

impl RunRecorder {
    pub fn new(dir: impl Into<PathBuf>, command: &str, arguments: Vec<String>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self {
            dir,
            entry: RunEntry {
                command: command.into(),
                arguments,
                config: BTreeMap::new(),
                code_version: CODE_VERSION.into(),
                seed: None,
                start_unix: unix_now(),
                end_unix: 0.0,
                artifacts: Vec::new(),
            },
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn set_config(&mut self, config: BTreeMap<String, String>, seed: Option<u64>) {
        self.entry.config = config;
        self.entry.seed = seed;
    }

    /// Registers a file already written inside the run directory.
    pub fn record(&mut self, name: &str) -> Result<()> {
        let (sha256, bytes) = sha256_file(self.file(name))?;
        self.entry.artifacts.retain(|a| a.path != name);
        self.entry.artifacts.push(ArtifactEntry {
            path: name.into(),
            sha256,
            bytes,
        });
        Ok(())
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> Result<()> {
        table.write(self.file(name))?;
        self.record(name)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(self.file(name), bytes)?;
        self.record(name)
    }

    pub fn finish(mut self) -> Result<RunEntry> {
        self.entry.end_unix = unix_now();
        let mut manifest = RunManifest::load_or_default(&self.dir)?;
        manifest.runs.push(self.entry.clone());
        manifest.save(&self.dir)?;
        Ok(self.entry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_records_and_verifies() {
        let dir = tempfile::tempdir().unwrap();
        let mut rec = RunRecorder::new(dir.path(), "test", vec![]).unwrap();
        let mut t = Table::new(["a", "b"]);
        t.push(vec![num(0.1), num(1e-300)]);
        rec.write_table("t.csv", &t).unwrap();
        rec.finish().unwrap();
        let m = RunManifest::load(dir.path()).unwrap();
        assert_eq!(m.runs.len(), 1);
        assert!(m.verify(dir.path()).is_empty());
        assert_eq!(std::fs::read_to_string(dir.path().join("t.csv")).unwrap(), "a,b\n0.1,1e-300\n");
        std::fs::write(dir.path().join("t.csv"), "tampered").unwrap();
        assert_eq!(m.verify(dir.path()), vec!["t.csv".to_string()]);
    }
}
