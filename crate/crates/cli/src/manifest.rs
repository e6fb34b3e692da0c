use std::path::{Path, PathBuf};
use std::time::Instant;

use refinery_core::jsonl;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub records: usize,
    pub failures: usize,
    pub cached_hits: u64,
    pub network_calls: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    pub command_line: Vec<String>,
    pub config_hash: String,
    pub settings: Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub backend_id: Option<String>,
    pub counts: Counts,
    pub wall_time_secs: f64,
}

/// sha256 of a file, or of the sorted `(relative path, file digest)` list of a directory.
pub fn digest_path(path: &Path) -> std::io::Result<String> {
    if path.is_dir() {
        let mut entries = Vec::new();
        collect(path, path, &mut entries)?;
        entries.sort();
        let mut h = Sha256::new();
        for (rel, digest) in entries {
            h.update(rel.as_bytes());
            h.update([0]);
            h.update(digest.as_bytes());
            h.update(*b"\n");
        }
        Ok(hex::encode(h.finalize()))
    } else {
        Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
    }
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<(String, String)>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
            out.push((rel, digest_path(&path)?));
        }
    }
    Ok(())
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Collects run facts while a command executes.
pub struct Recorder {
    command: String,
    started: Instant,
    settings: Value,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    pub backend_id: Option<String>,
    pub counts: Counts,
}

impl Recorder {
    pub fn new(command: &str, settings: Value) -> Self {
        Recorder {
            command: command.to_string(),
            started: Instant::now(),
            settings,
            inputs: Vec::new(),
            outputs: Vec::new(),
            backend_id: None,
            counts: Counts::default(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.to_path_buf());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.settings.to_string().as_bytes()))
    }

    /// Writes `<primary>.manifest.json` atomically.
    pub fn finish(self, primary: &Path) -> std::io::Result<PathBuf> {
        let digests = |paths: &[PathBuf]| -> std::io::Result<Vec<FileDigest>> {
            paths
                .iter()
                .map(|p| Ok(FileDigest { path: p.display().to_string(), sha256: digest_path(p)? }))
                .collect()
        };
        let manifest = RunManifest {
            run_id: uuid::Uuid::new_v4().to_string(),
            config_hash: self.config_hash(),
            command: self.command,
            command_line: std::env::args().collect(),
            settings: self.settings,
            inputs: digests(&self.inputs)?,
            outputs: digests(&self.outputs)?,
            backend_id: self.backend_id,
            counts: self.counts,
            wall_time_secs: self.started.elapsed().as_secs_f64(),
        };
        let path = manifest_path(primary);
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::other)?;
        bytes.push(b'\n');
        jsonl::write_atomic(&path, &bytes)?;
        Ok(path)
    }
}
