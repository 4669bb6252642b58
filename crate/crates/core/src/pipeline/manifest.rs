//! Append-only run log, one JSON object per line.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::sweep::SectorOutcome;
use crate::cache::{BUILD_ID, FORMAT_VERSION};
use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// Per-sector analysis stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisEntry {
    pub length: usize,
    pub stage: String,
    pub sectors: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub build_id: String,
    pub format_version: u32,
    pub started_unix: u64,
    pub seconds: f64,
    pub sectors: Vec<SectorOutcome>,
    pub analysis: Vec<AnalysisEntry>,
    pub outputs: Vec<String>,
    /// `None` on success.
    pub error: Option<String>,
}

impl RunManifest {
    pub fn start(command: &str, config_hash: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            build_id: BUILD_ID.to_string(),
            format_version: FORMAT_VERSION,
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            seconds: 0.0,
            sectors: Vec::new(),
            analysis: Vec::new(),
            outputs: Vec::new(),
            error: None,
        }
    }

    /// Append this run to `dir/manifest.jsonl`.
    pub fn append(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST_FILE);
        let mut f = OpenOptions::new().create(true).append(true).open(&path)?;
        writeln!(f, "{}", serde_json::to_string(self)?)?;
        Ok(path)
    }

    pub fn read_all(dir: &Path) -> Result<Vec<RunManifest>> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(Into::into))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appends_lines() {
        let dir = tempfile::tempdir().unwrap();
        RunManifest::start("spectrum", "ab").append(dir.path()).unwrap();
        RunManifest::start("diag-eth", "ab").append(dir.path()).unwrap();
        let all = RunManifest::read_all(dir.path()).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[1].command, "diag-eth");
    }
}
