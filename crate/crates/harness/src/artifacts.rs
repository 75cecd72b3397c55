//! Run manifests, check reports, and atomic JSON output.

use crate::error::{HarnessError, Result};
use lusin_core::check::CheckReport;
use lusin_core::lusin::BuildConfig;
use lusin_core::BoxDomain;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub const MANIFEST_VERSION: u32 = 1;
pub const REPORT_VERSION: u32 = 1;

/// Writes to a temporary file in the target directory, then renames it over
/// `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(HarnessError::io(dir))?;
    tmp.write_all(bytes).map_err(HarnessError::io(path))?;
    tmp.as_file().sync_all().map_err(HarnessError::io(path))?;
    tmp.persist(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(HarnessError::json(path))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(HarnessError::io(path))?;
    serde_json::from_slice(&bytes).map_err(HarnessError::json(path))
}

/// Everything needed to repeat a `construct` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub command: String,
    pub artifact_version: String,
    pub field: String,
    pub domain: BoxDomain,
    pub config: BuildConfig,
    /// Seconds since the Unix epoch when the run started. Not an input.
    pub created_unix: u64,
}

impl RunManifest {
    pub fn construct(field: String, domain: BoxDomain, config: BuildConfig) -> Self {
        RunManifest {
            version: MANIFEST_VERSION,
            command: "construct".into(),
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            field,
            domain,
            config,
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let m: RunManifest = read_json(path)?;
        if m.version != MANIFEST_VERSION {
            return Err(HarnessError::Version {
                path: path.to_path_buf(),
                expected: MANIFEST_VERSION,
                found: m.version,
            });
        }
        Ok(m)
    }
}

/// Output of `certify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub version: u32,
    pub function: String,
    pub seed: u64,
    pub pairs: usize,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}
