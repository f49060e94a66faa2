//! `manifest.json`: written before any output so that an interrupted run
//! leaves a manifest without `finished_unix`.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;
use crate::output::write_json;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Flags as given, after merging the run file.
    pub params: Value,
    /// Parameters after defaults were filled in, for commands that report them.
    pub resolved: Option<Value>,
    pub seed: u64,
    pub version: String,
    pub started_unix: f64,
    pub finished_unix: Option<f64>,
    pub outputs: Vec<PathBuf>,
    /// `Some(true)` when every checked inequality held, `None` for commands
    /// that check nothing.
    pub holds: Option<bool>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn start(command: &str, params: Value, seed: u64, dir: &Path) -> Result<Self> {
        let m = RunManifest {
            command: command.to_string(),
            params,
            resolved: None,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: now(),
            finished_unix: None,
            outputs: Vec::new(),
            holds: None,
        };
        m.write(dir)?;
        Ok(m)
    }

    pub fn finish(&mut self, dir: &Path, outputs: Vec<PathBuf>, resolved: Option<Value>, holds: Option<bool>) -> Result<()> {
        self.outputs = outputs;
        self.resolved = resolved;
        self.holds = holds;
        self.finished_unix = Some(now());
        self.write(dir)
    }

    fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(FILE_NAME), self)
    }
}
