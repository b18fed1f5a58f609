use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Backend, BackendDescriptor, BackendError, BackendKind, CompletionRequest, Role};

/// Exponential backoff for rate-limit and server errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Backoff {
    pub base: Duration,
    pub factor: f64,
    pub max_retries: u32,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff {
            base: Duration::from_secs(1),
            factor: 2.0,
            max_retries: 5,
        }
    }
}

impl Backoff {
    /// Delay before retry `n` (0-based).
    pub fn delay(&self, n: u32) -> Duration {
        self.base.mul_f64(self.factor.powi(n as i32))
    }

    pub fn schedule(&self) -> Vec<Duration> {
        (0..self.max_retries).map(|n| self.delay(n)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryEvent {
    pub tag: String,
    pub retry: u32,
    pub delay: Duration,
    pub reason: String,
}

/// Token bucket shared by every request of one backend.
pub struct RateLimiter {
    per_second: f64,
    capacity: f64,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    pub fn per_minute(requests: f64) -> Self {
        let per_second = requests / 60.0;
        let capacity = 1.0_f64.max(per_second);
        RateLimiter {
            per_second,
            capacity,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    /// Block until a request may go out.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut s = self.state.lock().expect("limiter lock");
                let now = Instant::now();
                s.0 = (s.0 + now.duration_since(s.1).as_secs_f64() * self.per_second).min(self.capacity);
                s.1 = now;
                if s.0 >= 1.0 {
                    s.0 -= 1.0;
                    return;
                }
                (1.0 - s.0) / self.per_second
            };
            std::thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}

#[derive(Clone)]
pub struct HttpConfig {
    /// Full chat-completions URL.
    pub endpoint: String,
    pub credential_env: String,
    pub api_key: String,
    /// Used when a request leaves `model_name` empty.
    pub default_model: Option<String>,
    pub timeout: Duration,
    pub backoff: Backoff,
    pub requests_per_minute: Option<f64>,
}

impl std::fmt::Debug for HttpConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpConfig")
            .field("endpoint", &self.endpoint)
            .field("credential_env", &self.credential_env)
            .field("api_key", &"<redacted>")
            .finish_non_exhaustive()
    }
}

impl HttpConfig {
    /// Read the credential from the environment variable the descriptor
    /// names.
    pub fn from_descriptor(d: &BackendDescriptor) -> Result<Self, BackendError> {
        let (Some(endpoint), Some(var)) = (&d.endpoint, &d.credential_env) else {
            return Err(BackendError::Config("the http backend needs an endpoint and a credential variable".into()));
        };
        let api_key = std::env::var(var)
            .map_err(|_| BackendError::Config(format!("credential variable {var} is not set")))?;
        Ok(HttpConfig {
            endpoint: endpoint.clone(),
            credential_env: var.clone(),
            api_key,
            default_model: d.model_name.clone(),
            timeout: Duration::from_secs(300),
            backoff: Backoff::default(),
            requests_per_minute: None,
        })
    }
}

type Sleeper = Box<dyn Fn(Duration) + Send + Sync>;

pub struct HttpBackend {
    config: HttpConfig,
    agent: ureq::Agent,
    limiter: Option<Arc<RateLimiter>>,
    retries: Mutex<Vec<RetryEvent>>,
    sleep: Sleeper,
}

enum Failure {
    /// The error to report if retries run out, and why we retried.
    Retryable(BackendError, String),
    Fatal(BackendError),
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let limiter = config.requests_per_minute.map(|r| Arc::new(RateLimiter::per_minute(r)));
        HttpBackend {
            config,
            agent,
            limiter,
            retries: Mutex::new(Vec::new()),
            sleep: Box::new(std::thread::sleep),
        }
    }

    /// Replace the sleep used between retries (tests observe the schedule
    /// without waiting).
    pub fn with_sleeper(mut self, sleep: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleep = Box::new(sleep);
        self
    }

    pub fn with_limiter(mut self, limiter: Arc<RateLimiter>) -> Self {
        self.limiter = Some(limiter);
        self
    }

    pub fn retry_log(&self) -> Vec<RetryEvent> {
        self.retries.lock().expect("retry log").clone()
    }

    fn body(&self, request: &CompletionRequest, n: usize) -> serde_json::Value {
        let messages: Vec<_> = request
            .messages
            .iter()
            .map(|m| {
                let role = match m.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::Assistant => "assistant",
                };
                json!({"role": role, "content": m.text})
            })
            .collect();
        let model = if request.model_name.is_empty() {
            self.config.default_model.clone().unwrap_or_default()
        } else {
            request.model_name.clone()
        };
        let mut body = json!({
            "model": model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "n": n,
        });
        if let Some(seed) = request.seed {
            body["seed"] = json!(seed);
        }
        body
    }

    fn post_once(&self, body: &str) -> Result<serde_json::Value, Failure> {
        if let Some(l) = &self.limiter {
            l.acquire();
        }
        let mut resp = self
            .agent
            .post(&self.config.endpoint)
            .header("Authorization", &format!("Bearer {}", self.config.api_key))
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| Failure::Retryable(BackendError::Transport(e.to_string()), e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Failure::Retryable(BackendError::Transport(e.to_string()), e.to_string()))?;
        match status {
            200..=299 => serde_json::from_str(&text)
                .map_err(|e| Failure::Fatal(BackendError::Transport(format!("malformed response: {e}")))),
            401 | 403 => Err(Failure::Fatal(BackendError::AuthFailure(format!("status {status}")))),
            429 => Err(Failure::Retryable(
                BackendError::RateLimitExhausted { retries: 0 },
                "status 429".into(),
            )),
            500..=599 => Err(Failure::Retryable(
                BackendError::Transport(format!("server error {status}")),
                format!("status {status}"),
            )),
            _ => Err(Failure::Fatal(BackendError::Transport(format!("status {status}: {text}")))),
        }
    }

    fn post(&self, tag: &str, body: &serde_json::Value) -> Result<serde_json::Value, BackendError> {
        let body = body.to_string();
        let mut retry = 0;
        loop {
            match self.post_once(&body) {
                Ok(v) => return Ok(v),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(e, reason)) => {
                    if retry >= self.config.backoff.max_retries {
                        return Err(match e {
                            BackendError::RateLimitExhausted { .. } => BackendError::RateLimitExhausted { retries: retry },
                            BackendError::Transport(m) => BackendError::Transport(format!("{m} (after {retry} retries)")),
                            other => other,
                        });
                    }
                    let delay = self.config.backoff.delay(retry);
                    self.retries.lock().expect("retry log").push(RetryEvent {
                        tag: tag.to_string(),
                        retry,
                        delay,
                        reason,
                    });
                    (self.sleep)(delay);
                    retry += 1;
                }
            }
        }
    }
}

fn choices(v: &serde_json::Value) -> Result<Vec<String>, BackendError> {
    let list = v["choices"]
        .as_array()
        .ok_or_else(|| BackendError::Transport("response has no choices".into()))?;
    list.iter()
        .map(|c| {
            c["message"]["content"]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| BackendError::Transport("choice without message content".into()))
        })
        .collect()
}

impl Backend for HttpBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<Vec<String>, BackendError> {
        request.validate()?;
        let mut out = Vec::with_capacity(request.n_candidates);
        // some endpoints ignore `n`; keep asking for the remainder
        while out.len() < request.n_candidates {
            let got = choices(&self.post(&request.request_tag, &self.body(request, request.n_candidates - out.len()))?)?;
            if got.is_empty() {
                return Err(BackendError::Transport("response has no choices".into()));
            }
            out.extend(got);
        }
        out.truncate(request.n_candidates);
        Ok(out)
    }

    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor {
            kind: BackendKind::Http,
            endpoint: Some(self.config.endpoint.clone()),
            credential_env: Some(self.config.credential_env.clone()),
            cache_path: None,
            script_path: None,
            model_name: self.config.default_model.clone(),
        }
    }
}
