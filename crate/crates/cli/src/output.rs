//! Artifact files, their hashes and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::scenario::{Loaded, Scenario};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub manifest_version: u32,
    pub library: &'static str,
    pub library_version: &'static str,
    pub kind: &'static str,
    pub seed: u64,
    /// SHA-256 of the resolved scenario and initial data (see [`config_hash`]).
    pub config_hash: String,
    pub scenario: &'a Scenario,
    pub artifacts: Vec<Artifact>,
    pub summary: serde_json::Value,
}

/// SHA-256 over the canonical JSON of the resolved scenario followed by the
/// resolved initial profile, so file-based inputs are covered too.
pub fn config_hash(loaded: &Loaded) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&loaded.scenario).expect("scenario serializes"));
    if let Some(p) = &loaded.profile {
        h.update(b"\n");
        h.update(serde_json::to_vec(p).expect("profile serializes"));
    }
    hex::encode(h.finalize())
}

/// Output directory: an explicit override (flag or environment), else the
/// scenario's `output.dir` relative to the scenario file, else `fracflow-out`.
pub fn resolve_dir(override_dir: Option<&Path>, loaded: &Loaded) -> PathBuf {
    match (override_dir, &loaded.scenario.output.dir) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(d)) => loaded.base_dir.join(d),
        (None, None) => PathBuf::from("fracflow-out"),
    }
}

/// A directory being filled with artifacts.
pub struct OutputDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(CliError::io(root))?;
        Ok(Self { root: root.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let mut w = self.stream(name)?;
        w.text(contents)?;
        self.close(w)
    }

    /// Opens a streamed artifact; pass it back to [`OutputDir::close`].
    pub fn stream(&self, name: &str) -> Result<ArtifactWriter> {
        let path = self.root.join(name);
        let file = File::create(&path).map_err(CliError::io(&path))?;
        Ok(ArtifactWriter { name: name.to_string(), path, inner: BufWriter::new(file), hash: Sha256::new(), bytes: 0 })
    }

    pub fn close(&mut self, mut w: ArtifactWriter) -> Result<()> {
        w.inner.flush().map_err(CliError::io(&w.path))?;
        self.artifacts.push(Artifact { path: w.name, bytes: w.bytes, sha256: hex::encode(w.hash.finalize()) });
        Ok(())
    }

    /// Writes the manifest last; returns its path.
    pub fn finish(self, loaded: &Loaded, summary: serde_json::Value) -> Result<PathBuf> {
        let manifest = Manifest {
            manifest_version: MANIFEST_VERSION,
            library: "fracflow",
            library_version: fracflow::VERSION,
            kind: loaded.scenario.kind.name(),
            seed: loaded.scenario.seed,
            config_hash: config_hash(loaded),
            scenario: &loaded.scenario,
            artifacts: self.artifacts,
            summary,
        };
        let path = self.root.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(CliError::io(&path))?;
        Ok(path)
    }
}

/// Buffered file writer that hashes what it writes.
pub struct ArtifactWriter {
    name: String,
    path: PathBuf,
    inner: BufWriter<File>,
    hash: Sha256,
    bytes: u64,
}

impl ArtifactWriter {
    pub fn text(&mut self, s: &str) -> Result<()> {
        self.write_all(s.as_bytes()).map_err(CliError::io(&self.path))
    }

    pub fn line(&mut self, s: &str) -> Result<()> {
        self.text(s)?;
        self.text("\n")
    }
}

impl Write for ArtifactWriter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hash.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}
