//! Run manifests: every emitted artifact gets a `<artifact>.manifest.json`
//! sidecar recording the tool version, the problem and input files with
//! content hashes, and any seed. Timestamps live only here, so artifact
//! bytes stay reproducible.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct FileRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<FileRef>,
    pub inputs: Vec<FileRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub generated_at: String,
}

pub fn hash_file(path: &str) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(command: &str) -> RunManifest {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            problem: None,
            inputs: Vec::new(),
            seed: None,
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    /// Records the problem reference: config files hash by content,
    /// `builtin:` references by the problem's identity hash.
    pub fn with_problem(
        mut self,
        path: &str,
        problem: &chaffmill::ProblemSpec,
    ) -> std::io::Result<RunManifest> {
        let sha256 = if path.starts_with("builtin:") {
            problem.identity_hash()
        } else {
            hash_file(path)?
        };
        self.problem = Some(FileRef {
            path: path.to_string(),
            sha256,
        });
        Ok(self)
    }

    pub fn with_input(mut self, path: &str) -> std::io::Result<RunManifest> {
        self.inputs.push(FileRef {
            path: path.to_string(),
            sha256: hash_file(path)?,
        });
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> RunManifest {
        self.seed = Some(seed);
        self
    }

    /// Writes `<artifact>.manifest.json` next to the artifact.
    pub fn write_beside(&self, artifact: &str) -> std::io::Result<()> {
        let path = format!("{}.manifest.json", artifact);
        let json = serde_json::to_string_pretty(self).expect("serializable");
        std::fs::write(Path::new(&path), json + "\n")
    }
}
