//! Completion backends: an OpenAI-compatible HTTP client, a scripted mock
//! and a content-addressed record/replay cache.

mod cache;
mod http;
mod mock;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use cache::{CacheEntry, CacheMode, CachingBackend};
pub use http::{Backoff, HttpBackend, HttpConfig, RateLimiter, RetryEvent};
pub use mock::{MockBackend, MockScript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub text: String,
}

impl Message {
    pub fn system(text: impl Into<String>) -> Self {
        Message {
            role: Role::System,
            text: text.into(),
        }
    }

    pub fn user(text: impl Into<String>) -> Self {
        Message {
            role: Role::User,
            text: text.into(),
        }
    }

    pub fn assistant(text: impl Into<String>) -> Self {
        Message {
            role: Role::Assistant,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub n_candidates: usize,
    pub max_tokens: u32,
    pub model_name: String,
    /// `stage|vignette|participant|attempt`; routes mock scripts and logs,
    /// never part of the cache key.
    pub request_tag: String,
    /// Forwarded to endpoints that accept it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CompletionRequest {
    pub fn validate(&self) -> Result<(), BackendError> {
        if self.messages.is_empty() {
            return Err(BackendError::InvalidRequest("no messages".into()));
        }
        if self.n_candidates == 0 {
            return Err(BackendError::InvalidRequest("n_candidates must be at least 1".into()));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(BackendError::InvalidRequest("temperature must be a non-negative number".into()));
        }
        Ok(())
    }

    /// Canonical text of everything that determines the completions.
    ///
    /// Serialized as one JSON array, which is injective over the fields
    /// because JSON strings are escaped and floats print round-trip.
    pub fn canonical(&self) -> String {
        serde_json::json!([
            self.messages,
            self.temperature,
            self.n_candidates,
            self.max_tokens,
            self.model_name,
            self.seed
        ])
        .to_string()
    }

    /// Hex SHA-256 of [`canonical`](Self::canonical).
    pub fn cache_key(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited; gave up after {retries} retries")]
    RateLimitExhausted { retries: u32 },
    #[error("authentication failed: {0}")]
    AuthFailure(String),
    #[error("no cached response for request {key} (tag {tag})")]
    ReplayMiss { key: String, tag: String },
    #[error("mock script has no response for tag `{0}`")]
    ScriptExhausted(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error("backend misconfigured: {0}")]
    Config(String),
}

pub trait Backend: Send + Sync {
    /// Exactly `n_candidates` completion texts.
    fn complete(&self, request: &CompletionRequest) -> Result<Vec<String>, BackendError>;

    fn descriptor(&self) -> BackendDescriptor;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Mock,
    Replay,
}

/// How a backend was configured. Holds the *name* of the credential
/// variable, never its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential_env: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
}

impl BackendDescriptor {
    pub fn validate(&self) -> Result<(), BackendError> {
        match self.kind {
            BackendKind::Http if self.endpoint.is_none() || self.credential_env.is_none() => Err(
                BackendError::Config("the http backend needs an endpoint and a credential variable".into()),
            ),
            BackendKind::Replay if self.cache_path.is_none() => {
                Err(BackendError::Config("the replay backend needs a cache path".into()))
            }
            BackendKind::Mock if self.script_path.is_none() => {
                Err(BackendError::Config("the mock backend needs a script".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Build the backend a descriptor names. An http descriptor with a cache
/// path records every exchange into it.
pub fn open_backend(d: &BackendDescriptor) -> Result<Arc<dyn Backend>, BackendError> {
    d.validate()?;
    Ok(match d.kind {
        BackendKind::Mock => Arc::new(MockBackend::from_path(d.script_path.as_ref().expect("validated"))?),
        BackendKind::Replay => Arc::new(CachingBackend::new(
            None,
            d.cache_path.clone().expect("validated"),
            CacheMode::Replay,
        )?),
        BackendKind::Http => {
            let config = HttpConfig::from_descriptor(d)?;
            let http: Arc<dyn Backend> = Arc::new(HttpBackend::new(config));
            match &d.cache_path {
                Some(p) => Arc::new(CachingBackend::new(Some(http), p.clone(), CacheMode::ReadThrough)?),
                None => http,
            }
        }
    })
}
