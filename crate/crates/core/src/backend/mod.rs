//! Generative backends behind one completion contract, with retry and an
//! on-disk response cache.

mod cache;
mod http;
mod oracle;
mod retry;
mod scrambler;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use cache::{cached_complete, CachedBackend, ResponseCache, CACHE_MAGIC};
pub use http::{HttpBackend, HttpConfig, API_KEY_ENV, DEFAULT_RESPONSE_POINTER, ENDPOINT_ENV};
pub use oracle::OracleBackend;
pub use retry::{with_retry, RetryPolicy};
pub use scrambler::{scramble, ScramblerBackend};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("request carries no ground truth for the oracle")]
    MissingGroundTruth,
    #[error("ground truth does not fit the input: {0}")]
    BadGroundTruth(String),
    #[error("backend misconfigured: {0}")]
    Config(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: Box<BackendError> },
}

impl BackendError {
    /// Transport failures, 5xx and 429 are worth another attempt.
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::Transport(_) => true,
            BackendError::Status { status, .. } => *status == 429 || (500..600).contains(status),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Oracle,
    Identity,
    Scrambler,
}

impl BackendKind {
    pub fn parse(s: &str) -> Option<BackendKind> {
        match s {
            "http" => Some(BackendKind::Http),
            "oracle" => Some(BackendKind::Oracle),
            "identity" => Some(BackendKind::Identity),
            "scrambler" => Some(BackendKind::Scrambler),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BackendKind::Http => "http",
            BackendKind::Oracle => "oracle",
            BackendKind::Identity => "identity",
            BackendKind::Scrambler => "scrambler",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub backend_id: String,
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub model_name: Option<String>,
}

impl BackendDescriptor {
    pub fn local(kind: BackendKind) -> Self {
        BackendDescriptor { backend_id: kind.as_str().to_string(), kind, endpoint: None, model_name: None }
    }

    pub fn http(endpoint: impl Into<String>, model_name: impl Into<String>) -> Self {
        let model_name = model_name.into();
        BackendDescriptor {
            backend_id: format!("http:{model_name}"),
            kind: BackendKind::Http,
            endpoint: Some(endpoint.into()),
            model_name: Some(model_name),
        }
    }

    /// http needs endpoint and model; the local kinds must not carry them.
    pub fn validate(&self) -> Result<(), BackendError> {
        let has = self.endpoint.is_some() && self.model_name.is_some();
        match self.kind {
            BackendKind::Http if !has => Err(BackendError::Config("http backend needs endpoint and model_name".into())),
            BackendKind::Http => Ok(()),
            _ if self.endpoint.is_some() || self.model_name.is_some() => {
                Err(BackendError::Config(format!("{} backend takes no endpoint or model", self.kind.as_str())))
            }
            _ => Ok(()),
        }
    }
}

/// Ground-truth metadata the oracle uses to compute an ideal refinement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleHint {
    /// One benchmark value at character span `[start, end)`.
    Pii { value: String, span: (usize, usize), positive: bool },
    /// Character spans to replace with placeholders.
    Spans { spans: Vec<(usize, usize)> },
    /// Company JSON whose incoming-CEO fields are private.
    Companies,
    /// Facts and question/answer pairs known to be present in a toxic pair.
    Detox { facts: Vec<String>, qa: Vec<(String, String)> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestContext {
    /// The record embedded in the prompt.
    pub input: String,
    pub hint: Option<OracleHint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub max_output_chars: usize,
    pub temperature: f64,
    pub request_id: String,
    #[serde(skip)]
    pub context: Option<RequestContext>,
}

/// Hex SHA-256 over length-prefixed prompt, backend id and temperature bits.
pub fn request_id(prompt: &str, backend_id: &str, temperature: f64) -> String {
    let mut h = Sha256::new();
    for part in [prompt.as_bytes(), backend_id.as_bytes()] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    h.update(temperature.to_bits().to_le_bytes());
    hex::encode(h.finalize())
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>, backend_id: &str, temperature: f64, max_output_chars: usize) -> Self {
        let prompt = prompt.into();
        assert!(!prompt.is_empty(), "prompt must be non-empty");
        assert!(temperature >= 0.0, "temperature must be non-negative");
        let request_id = request_id(&prompt, backend_id, temperature);
        CompletionRequest { prompt, max_output_chars, temperature, request_id, context: None }
    }

    pub fn with_context(mut self, context: RequestContext) -> Self {
        self.context = Some(context);
        self
    }

    /// The embedded record: the attached context, else the prompt's final
    /// paragraph.
    pub fn input(&self) -> &str {
        match &self.context {
            Some(c) => &c.input,
            None => self.prompt.rsplit("\n\n").next().unwrap_or(&self.prompt),
        }
    }
}

pub trait Backend: Send + Sync {
    fn descriptor(&self) -> &BackendDescriptor;

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError>;

    /// Requests that left the process so far.
    fn network_calls(&self) -> u64 {
        0
    }

    /// Responses served from a cache so far.
    fn cache_hits(&self) -> u64 {
        0
    }
}

impl<B: Backend + ?Sized> Backend for Arc<B> {
    fn descriptor(&self) -> &BackendDescriptor {
        (**self).descriptor()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        (**self).complete(request)
    }

    fn network_calls(&self) -> u64 {
        (**self).network_calls()
    }

    fn cache_hits(&self) -> u64 {
        (**self).cache_hits()
    }
}

/// Returns the embedded input unchanged.
#[derive(Debug)]
pub struct IdentityBackend {
    descriptor: BackendDescriptor,
    calls: AtomicU64,
}

impl Default for IdentityBackend {
    fn default() -> Self {
        IdentityBackend { descriptor: BackendDescriptor::local(BackendKind::Identity), calls: AtomicU64::new(0) }
    }
}

impl IdentityBackend {
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl Backend for IdentityBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(request.input().to_string())
    }
}

/// Builds one of the local backends by kind.
pub fn local_backend(kind: BackendKind) -> Result<Box<dyn Backend>, BackendError> {
    match kind {
        BackendKind::Identity => Ok(Box::new(IdentityBackend::default())),
        BackendKind::Scrambler => Ok(Box::new(ScramblerBackend::default())),
        BackendKind::Oracle => Ok(Box::new(OracleBackend::default())),
        BackendKind::Http => Err(BackendError::Config("http backend needs an HttpConfig".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_ids_are_stable_and_distinct() {
        let a = request_id("p", "identity", 0.0);
        assert_eq!(a, request_id("p", "identity", 0.0));
        assert_ne!(a, request_id("p", "identity", 0.5));
        assert_ne!(a, request_id("p", "oracle", 0.0));
        assert_ne!(request_id("ab", "c", 0.0), request_id("a", "bc", 0.0));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn identity_returns_input() {
        let text = "Dude, this galaxy has, like, 81404096586 planets";
        let req = CompletionRequest::new(format!("Instructions\n\n{text}"), "identity", 0.0, 1000);
        assert_eq!(IdentityBackend::default().complete(&req).unwrap(), text);
        let req = req.with_context(RequestContext { input: "x\n\ny".into(), hint: None });
        assert_eq!(IdentityBackend::default().complete(&req).unwrap(), "x\n\ny");
    }

    #[test]
    fn retryable_classes() {
        assert!(BackendError::Transport("reset".into()).is_retryable());
        assert!(BackendError::Status { status: 503, body: String::new() }.is_retryable());
        assert!(BackendError::Status { status: 429, body: String::new() }.is_retryable());
        assert!(!BackendError::Status { status: 404, body: String::new() }.is_retryable());
        assert!(!BackendError::Malformed("x".into()).is_retryable());
    }

    #[test]
    fn descriptor_validation() {
        assert!(BackendDescriptor::local(BackendKind::Oracle).validate().is_ok());
        assert!(BackendDescriptor::http("http://x", "m").validate().is_ok());
        let mut d = BackendDescriptor::local(BackendKind::Http);
        assert!(d.validate().is_err());
        d.kind = BackendKind::Identity;
        d.endpoint = Some("http://x".into());
        assert!(d.validate().is_err());
    }
}
