use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{Backend, BackendDescriptor, BackendError, BackendKind, CompletionRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheMode {
    /// Serve only from the cache; a miss is an error.
    Replay,
    /// Always ask the inner backend and overwrite the entry.
    Record,
    /// Serve hits, record misses.
    ReadThrough,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub request: CompletionRequest,
    pub completions: Vec<String>,
    /// Seconds since the Unix epoch when recorded.
    pub timestamp: u64,
}

/// Content-addressed response cache in front of an optional backend. Each
/// entry lives in `<dir>/<sha256 of canonical request>.json`.
pub struct CachingBackend {
    inner: Option<Arc<dyn Backend>>,
    dir: PathBuf,
    mode: CacheMode,
    inner_calls: AtomicU64,
    hits: AtomicU64,
}

impl CachingBackend {
    pub fn new(inner: Option<Arc<dyn Backend>>, dir: PathBuf, mode: CacheMode) -> Result<Self, BackendError> {
        if inner.is_none() && mode != CacheMode::Replay {
            return Err(BackendError::Config("recording needs an inner backend".into()));
        }
        fs::create_dir_all(&dir).map_err(|e| BackendError::Cache(format!("{}: {e}", dir.display())))?;
        Ok(CachingBackend {
            inner,
            dir,
            mode,
            inner_calls: AtomicU64::new(0),
            hits: AtomicU64::new(0),
        })
    }

    /// Requests forwarded to the inner backend so far.
    pub fn inner_calls(&self) -> u64 {
        self.inner_calls.load(Ordering::Relaxed)
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn lookup(&self, request: &CompletionRequest) -> Result<Option<Vec<String>>, BackendError> {
        let path = self.path(&request.cache_key());
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(BackendError::Cache(format!("{}: {e}", path.display()))),
        };
        let entry: CacheEntry =
            serde_json::from_str(&text).map_err(|e| BackendError::Cache(format!("{}: {e}", path.display())))?;
        // guards against a hash collision or a hand-edited file
        if entry.request.canonical() != request.canonical() {
            return Err(BackendError::Cache(format!("{} holds a different request", path.display())));
        }
        Ok(Some(entry.completions))
    }

    fn store(&self, request: &CompletionRequest, completions: &[String]) -> Result<(), BackendError> {
        let key = request.cache_key();
        let entry = CacheEntry {
            request: request.clone(),
            completions: completions.to_vec(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        };
        let text = serde_json::to_string_pretty(&entry).map_err(|e| BackendError::Cache(e.to_string()))?;
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        fs::write(&tmp, text)
            .and_then(|_| fs::rename(&tmp, self.path(&key)))
            .map_err(|e| BackendError::Cache(format!("{}: {e}", self.dir.display())))
    }
}

impl Backend for CachingBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<Vec<String>, BackendError> {
        request.validate()?;
        if self.mode != CacheMode::Record {
            if let Some(hit) = self.lookup(request)? {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok(hit);
            }
            if self.mode == CacheMode::Replay {
                return Err(BackendError::ReplayMiss {
                    key: request.cache_key(),
                    tag: request.request_tag.clone(),
                });
            }
        }
        let inner = self.inner.as_ref().expect("checked in new");
        self.inner_calls.fetch_add(1, Ordering::Relaxed);
        let out = inner.complete(request)?;
        self.store(request, &out)?;
        Ok(out)
    }

    fn descriptor(&self) -> BackendDescriptor {
        let mut d = match &self.inner {
            Some(inner) => inner.descriptor(),
            None => BackendDescriptor {
                kind: BackendKind::Replay,
                endpoint: None,
                credential_env: None,
                cache_path: None,
                script_path: None,
                model_name: None,
            },
        };
        d.cache_path = Some(self.dir.clone());
        d
    }
}
