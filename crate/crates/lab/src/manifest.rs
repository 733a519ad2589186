//! Run manifests: everything needed to rerun an experiment and to audit
//! which files it produced.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::LabError;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub config_path: PathBuf,
    pub config_sha256: String,
    /// Hash of the resolved model description.
    pub model_sha256: Option<String>,
    /// Decimal, since JSON numbers cannot carry a `u128`.
    pub seed: String,
    pub samples: Option<u64>,
    pub threads: Option<usize>,
    pub format: String,
    /// Resolved experiment parameters (grids, sample counts, ...).
    pub parameters: serde_json::Value,
    pub started_unix: f64,
    pub finished_unix: Option<f64>,
    pub wall_time_s: Option<f64>,
    /// `running`, `ok` or `failed`.
    pub status: String,
    /// Output file names relative to the manifest directory.
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn now_unix() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), LabError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        std::fs::write(dir.join(FILE_NAME), s)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| LabError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn seed(&self) -> Result<u128, LabError> {
        self.seed.parse().map_err(|_| LabError::Usage(format!("manifest seed `{}` is not a u128", self.seed)))
    }

    pub fn finish(&mut self, status: &str) {
        let t = now_unix();
        self.finished_unix = Some(t);
        self.wall_time_s = Some(t - self.started_unix);
        self.status = status.into();
    }
}
