//! Per-invocation run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub artifacts: Vec<PathBuf>,
    pub pass: bool,
    pub wall_time_ms: u64,
}

/// Collects what a command did while it runs.
pub struct RunRecorder {
    command: String,
    parameters: Value,
    seed: Option<u64>,
    artifacts: Vec<PathBuf>,
    start: Instant,
}

impl RunRecorder {
    pub fn start(command: &str, parameters: Value, seed: Option<u64>) -> Self {
        Self { command: command.to_string(), parameters, seed, artifacts: Vec::new(), start: Instant::now() }
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.to_path_buf());
    }

    pub fn finish(self, pass: bool) -> RunManifest {
        RunManifest {
            command: self.command,
            parameters: self.parameters,
            seed: self.seed,
            artifacts: self.artifacts,
            pass,
            wall_time_ms: self.start.elapsed().as_millis() as u64,
        }
    }
}

impl RunManifest {
    /// Writes to `path`, or as a single line on stderr when there is none.
    pub fn emit(&self, path: Option<&Path>) -> std::io::Result<()> {
        let line = serde_json::to_string(self).map_err(std::io::Error::other)?;
        match path {
            Some(p) => std::fs::write(p, line + "\n"),
            None => {
                eprintln!("{line}");
                Ok(())
            }
        }
    }
}
