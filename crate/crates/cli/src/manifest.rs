use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
    Failed,
}

/// Provenance record kept next to every artifact a command writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub code_version: String,
    pub started_unix_s: u64,
    pub finished_unix_s: Option<u64>,
    pub status: RunStatus,
    pub error: Option<String>,
    /// Full configuration snapshot, as TOML.
    pub config: String,
    /// Resolved scenario, as TOML.
    pub scenario: String,
    pub checkpoints: Vec<PathBuf>,
    pub logs: Vec<PathBuf>,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn start(command: &str, config: String, scenario: String) -> Self {
        RunManifest {
            command: command.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_s: unix_now(),
            finished_unix_s: None,
            status: RunStatus::Running,
            error: None,
            config,
            scenario,
            checkpoints: Vec::new(),
            logs: Vec::new(),
        }
    }

    pub fn finish(&mut self, result: Result<(), String>) {
        self.finished_unix_s = Some(unix_now());
        match result {
            Ok(()) => self.status = RunStatus::Complete,
            Err(e) => {
                self.status = RunStatus::Failed;
                self.error = Some(e);
            }
        }
    }

    /// Writes `manifest.json` in `dir` via a temporary file and rename.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(serde_json::to_string_pretty(self).expect("manifest serializes").as_bytes())?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        fs::rename(&tmp, dir.join(MANIFEST_FILE))
    }

    #[cfg(test)]
    pub fn read(dir: &Path) -> std::io::Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_finalize() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::start("train", "seed = 1\n".into(), String::new());
        m.write(dir.path()).unwrap();
        assert_eq!(RunManifest::read(dir.path()).unwrap().status, RunStatus::Running);
        m.logs.push("episodes.log".into());
        m.finish(Ok(()));
        m.write(dir.path()).unwrap();
        let back = RunManifest::read(dir.path()).unwrap();
        assert_eq!(back, m);
        assert!(back.finished_unix_s.unwrap() >= back.started_unix_s);
        assert!(!dir.path().join("manifest.json.tmp").exists());
    }
}
