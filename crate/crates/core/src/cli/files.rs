use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::lm::BackendDescriptor;
use crate::olympics::Vignette;

pub const MANIFEST: &str = "manifest.json";
pub const JUDGMENTS: &str = "judgments.json";

/// Enough to re-execute a run: with a mock or replay backend the outputs
/// other than this file come back byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, as given.
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<BackendDescriptor>,
    pub tool_version: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Failure(format!("{}: {e}", path.display()))
}

/// Write via a sibling temp file and rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes)
        .and_then(|_| fs::rename(&tmp, path))
        .map_err(|e| io_err(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}

/// `*.json` files under `path` in name order, or `path` itself.
fn json_files(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| io_err(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .filter(|p| p.file_name().is_some_and(|n| n != MANIFEST))
        .collect();
    files.sort();
    Ok(files)
}

/// Vignettes from files and directories, in argument then name order. An
/// unreadable input is a usage error.
pub fn load_vignettes(paths: &[PathBuf]) -> Result<Vec<Vignette>, CliError> {
    let usage = |e: CliError| CliError::Usage(e.to_string());
    let mut out = Vec::new();
    for p in paths {
        for f in json_files(p).map_err(usage)? {
            out.push(read_json(&f).map_err(usage)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no vignette files found".into()));
    }
    Ok(out)
}

/// Record one output path relative to the run directory.
pub struct Outputs {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(root: &Path) -> Self {
        Outputs {
            root: root.to_path_buf(),
            written: Vec::new(),
        }
    }

    pub fn json(&mut self, rel: impl AsRef<Path>, value: &impl Serialize) -> Result<(), CliError> {
        write_json(&self.root.join(rel.as_ref()), value)?;
        self.written.push(rel.as_ref().to_path_buf());
        Ok(())
    }

    pub fn bytes(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(&self.root.join(rel.as_ref()), bytes)?;
        self.written.push(rel.as_ref().to_path_buf());
        Ok(())
    }

    pub fn into_paths(self) -> Vec<PathBuf> {
        self.written
    }
}
