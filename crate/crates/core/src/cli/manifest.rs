use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::io::write_atomic;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA: u32 = 1;

/// A file and the SHA-256 of its contents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    /// Digest of `path`, recorded under `name`.
    pub fn of(path: &Path, name: &str) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(FileDigest { path: name.to_string(), sha256: hex::encode(Sha256::digest(&bytes)) })
    }
}

/// Record of one command invocation, written last into its output
/// directory.
///
/// Input paths are recorded by file name and output paths relative to the
/// output directory, so manifests of runs on identical inputs compare
/// byte for byte. With `SOURCE_DATE_EPOCH` set, both timestamps take its
/// value and the wall clock is reported as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_at: u64,
    pub finished_at: u64,
    pub wall_clock_secs: f64,
    pub metrics: serde_json::Value,
}

/// Timestamps for a run, honoring `SOURCE_DATE_EPOCH`.
pub struct RunClock {
    fixed: Option<u64>,
    started_at: u64,
    start: Instant,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl RunClock {
    pub fn start() -> Result<Self> {
        let fixed = match std::env::var("SOURCE_DATE_EPOCH") {
            Ok(v) => Some(v.trim().parse::<u64>().map_err(|_| {
                Error::InvalidArgument(format!("SOURCE_DATE_EPOCH must be a unix timestamp, got `{v}`"))
            })?),
            Err(_) => None,
        };
        Ok(RunClock { fixed, started_at: fixed.unwrap_or_else(unix_now), start: Instant::now() })
    }

    /// `(started_at, finished_at, wall_clock_secs)`.
    pub fn finish(&self) -> (u64, u64, f64) {
        match self.fixed {
            Some(t) => (t, t, 0.0),
            None => (self.started_at, unix_now(), self.start.elapsed().as_secs_f64()),
        }
    }
}

impl RunManifest {
    /// Digests `outputs` (names relative to `out_dir`), stamps the finish
    /// time and writes the manifest atomically into `out_dir`.
    #[allow(clippy::too_many_arguments)]
    pub fn write(
        out_dir: &Path,
        command: &str,
        seed: u64,
        config: serde_json::Value,
        inputs: Vec<FileDigest>,
        outputs: &[String],
        clock: &RunClock,
        metrics: serde_json::Value,
    ) -> Result<RunManifest> {
        let mut names: Vec<&String> = outputs.iter().collect();
        names.sort();
        names.dedup();
        let outputs = names.into_iter().map(|n| FileDigest::of(&out_dir.join(n), n)).collect::<Result<Vec<_>>>()?;
        let (started_at, finished_at, wall_clock_secs) = clock.finish();
        let manifest = RunManifest {
            schema: MANIFEST_SCHEMA,
            command: command.to_string(),
            seed,
            config,
            inputs,
            outputs,
            started_at,
            finished_at,
            wall_clock_secs,
            metrics,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        write_atomic(&out_dir.join(MANIFEST_FILE), &text)?;
        Ok(manifest)
    }

    pub fn read(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })
    }
}
