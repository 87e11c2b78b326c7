use std::collections::{BTreeMap, VecDeque};
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const ENV_API_KEY: &str = "LUDO_LLM_API_KEY";
pub const ENV_ENDPOINT: &str = "LUDO_LLM_ENDPOINT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub model: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout: Duration,
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>, model: impl Into<String>) -> Self {
        CompletionRequest {
            prompt: prompt.into(),
            model: model.into(),
            temperature: 0.0,
            max_retries: 3,
            timeout: Duration::from_secs(60),
        }
    }

    /// Stable key for record/replay fixtures.
    pub fn fixture_key(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.model.as_bytes());
        h.update([0]);
        h.update(self.prompt.as_bytes());
        hex::encode(h.finalize())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportErrorKind {
    MissingCredentials,
    Timeout,
    RateLimited,
    Unavailable,
    Protocol,
    NotRecorded,
}

impl TransportErrorKind {
    pub fn retryable(self) -> bool {
        matches!(self, TransportErrorKind::Timeout | TransportErrorKind::RateLimited | TransportErrorKind::Unavailable)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize, Deserialize)]
#[error("{kind:?}: {message}")]
pub struct TransportError {
    pub kind: TransportErrorKind,
    pub message: String,
}

impl TransportError {
    pub fn new(kind: TransportErrorKind, message: impl Into<String>) -> Self {
        TransportError { kind, message: message.into() }
    }

    /// Short tag stored with evaluation records.
    pub fn tag(&self) -> String {
        let kind = serde_json::to_value(self.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        format!("transport:{kind}")
    }
}

/// A text-completion service.
pub trait Completer: Send + Sync {
    /// One attempt, without retries.
    fn complete_once(&self, req: &CompletionRequest) -> Result<String, TransportError>;
}

/// Exponential backoff schedule between retries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Backoff {
    pub initial: Duration,
    pub factor: f64,
    pub max: Duration,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff { initial: Duration::from_millis(500), factor: 2.0, max: Duration::from_secs(30) }
    }
}

impl Backoff {
    pub const NONE: Backoff = Backoff { initial: Duration::ZERO, factor: 1.0, max: Duration::ZERO };

    pub fn delay(&self, retry: u32) -> Duration {
        let d = self.initial.as_secs_f64() * self.factor.powi(retry as i32);
        Duration::from_secs_f64(d.min(self.max.as_secs_f64()))
    }
}

/// Calls `completer` with up to `req.max_retries` retries on retryable errors.
pub fn complete(completer: &dyn Completer, req: &CompletionRequest, backoff: Backoff) -> Result<String, TransportError> {
    let mut retry = 0;
    loop {
        match completer.complete_once(req) {
            Ok(text) => return Ok(text),
            Err(e) if e.kind.retryable() && retry < req.max_retries => {
                std::thread::sleep(backoff.delay(retry));
                retry += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Minimum spacing between requests shared across threads.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Instant>,
}

impl RateLimiter {
    pub fn per_second(rps: f64) -> Self {
        let interval = if rps > 0.0 { Duration::from_secs_f64(1.0 / rps) } else { Duration::ZERO };
        RateLimiter { interval, next: Mutex::new(Instant::now()) }
    }

    pub fn wait(&self) {
        let slot = {
            let mut next = self.next.lock().expect("rate limiter poisoned");
            let now = Instant::now();
            let slot = (*next).max(now);
            *next = slot + self.interval;
            slot
        };
        let now = Instant::now();
        if slot > now {
            std::thread::sleep(slot - now);
        }
    }
}

/// Returns a fixed text for every request.
#[derive(Clone, Debug)]
pub struct StubCompleter(pub String);

impl Completer for StubCompleter {
    fn complete_once(&self, _req: &CompletionRequest) -> Result<String, TransportError> {
        Ok(self.0.clone())
    }
}

/// Plays back a fixed sequence of outcomes, then repeats the last one.
#[derive(Debug)]
pub struct ScriptedCompleter {
    script: Mutex<VecDeque<Result<String, TransportError>>>,
    calls: Mutex<u32>,
}

impl ScriptedCompleter {
    pub fn new(script: impl IntoIterator<Item = Result<String, TransportError>>) -> Self {
        ScriptedCompleter { script: Mutex::new(script.into_iter().collect()), calls: Mutex::new(0) }
    }

    pub fn calls(&self) -> u32 {
        *self.calls.lock().unwrap()
    }
}

impl Completer for ScriptedCompleter {
    fn complete_once(&self, _req: &CompletionRequest) -> Result<String, TransportError> {
        *self.calls.lock().unwrap() += 1;
        let mut s = self.script.lock().unwrap();
        if s.len() > 1 {
            s.pop_front().unwrap()
        } else {
            s.front().cloned().unwrap_or_else(|| Err(TransportError::new(TransportErrorKind::Unavailable, "empty script")))
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub model: String,
    pub response: String,
}

/// Recorded responses keyed by [`CompletionRequest::fixture_key`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixtures(pub BTreeMap<String, FixtureEntry>);

impl Fixtures {
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(self)?)?;
        std::fs::rename(tmp, path)
    }
}

/// Answers only from recorded fixtures.
#[derive(Clone, Debug, Default)]
pub struct ReplayCompleter {
    pub fixtures: Fixtures,
}

impl Completer for ReplayCompleter {
    fn complete_once(&self, req: &CompletionRequest) -> Result<String, TransportError> {
        self.fixtures
            .0
            .get(&req.fixture_key())
            .map(|e| e.response.clone())
            .ok_or_else(|| TransportError::new(TransportErrorKind::NotRecorded, format!("no fixture for {}", req.fixture_key())))
    }
}

/// Forwards to `inner` and keeps every successful response.
pub struct RecordingCompleter<C> {
    pub inner: C,
    recorded: Mutex<Fixtures>,
}

impl<C: Completer> RecordingCompleter<C> {
    pub fn new(inner: C) -> Self {
        RecordingCompleter { inner, recorded: Mutex::new(Fixtures::default()) }
    }

    pub fn fixtures(&self) -> Fixtures {
        self.recorded.lock().unwrap().clone()
    }
}

impl<C: Completer> Completer for RecordingCompleter<C> {
    fn complete_once(&self, req: &CompletionRequest) -> Result<String, TransportError> {
        let text = self.inner.complete_once(req)?;
        self.recorded
            .lock()
            .unwrap()
            .0
            .insert(req.fixture_key(), FixtureEntry { model: req.model.clone(), response: text.clone() });
        Ok(text)
    }
}

/// Chat-completion client over HTTP. The endpoint and key come from
/// `LUDO_LLM_ENDPOINT` and `LUDO_LLM_API_KEY`.
#[cfg(feature = "http")]
pub struct HttpCompleter {
    endpoint: String,
    api_key: String,
}

#[cfg(feature = "http")]
impl HttpCompleter {
    pub fn from_env() -> Result<Self, TransportError> {
        let get = |k: &str| {
            std::env::var(k).map_err(|_| TransportError::new(TransportErrorKind::MissingCredentials, format!("{k} is not set")))
        };
        Ok(HttpCompleter { endpoint: get(ENV_ENDPOINT)?, api_key: get(ENV_API_KEY)? })
    }
}

#[cfg(feature = "http")]
impl Completer for HttpCompleter {
    fn complete_once(&self, req: &CompletionRequest) -> Result<String, TransportError> {
        use TransportErrorKind as K;
        let agent: ureq::Agent = ureq::Agent::config_builder().timeout_global(Some(req.timeout)).build().into();
        let body = serde_json::json!({
            "model": req.model,
            "temperature": req.temperature,
            "messages": [{"role": "user", "content": req.prompt}],
        });
        let resp = agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(&body);
        let mut resp = match resp {
            Ok(r) => r,
            Err(ureq::Error::StatusCode(429)) => return Err(TransportError::new(K::RateLimited, "HTTP 429")),
            Err(ureq::Error::StatusCode(c)) if c >= 500 => return Err(TransportError::new(K::Unavailable, format!("HTTP {c}"))),
            Err(ureq::Error::StatusCode(c)) => return Err(TransportError::new(K::Protocol, format!("HTTP {c}"))),
            Err(ureq::Error::Timeout(t)) => return Err(TransportError::new(K::Timeout, t.to_string())),
            Err(e) => return Err(TransportError::new(K::Unavailable, e.to_string())),
        };
        let v: serde_json::Value =
            resp.body_mut().read_json().map_err(|e| TransportError::new(K::Protocol, e.to_string()))?;
        v.pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| TransportError::new(K::Protocol, "response lacks choices[0].message.content"))
    }
}
