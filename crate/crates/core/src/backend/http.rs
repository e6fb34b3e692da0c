use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde_json::{json, Value};

use super::{with_retry, Backend, BackendDescriptor, BackendError, CompletionRequest, RetryPolicy};

pub const API_KEY_ENV: &str = "REFINERY_API_KEY";
pub const ENDPOINT_ENV: &str = "REFINERY_ENDPOINT";
pub const DEFAULT_RESPONSE_POINTER: &str = "/choices/0/message/content";
const CHARS_PER_TOKEN: usize = 4;

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    /// JSON pointer to the completion text in the response body.
    pub response_pointer: String,
    pub timeout: Duration,
    pub retry: RetryPolicy,
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        HttpConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: None,
            response_pointer: DEFAULT_RESPONSE_POINTER.to_string(),
            timeout: Duration::from_secs(120),
            retry: RetryPolicy::default(),
        }
    }

    /// Endpoint and key from `REFINERY_ENDPOINT` / `REFINERY_API_KEY`;
    /// `endpoint` overrides the variable when given.
    pub fn from_env(endpoint: Option<String>, model: impl Into<String>) -> Result<Self, BackendError> {
        let endpoint = endpoint
            .or_else(|| std::env::var(ENDPOINT_ENV).ok())
            .ok_or_else(|| BackendError::Config(format!("no endpoint given and {ENDPOINT_ENV} unset")))?;
        let mut config = HttpConfig::new(endpoint, model);
        config.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Ok(config)
    }
}

/// Chat-style JSON POST with bearer-token auth.
pub struct HttpBackend {
    descriptor: BackendDescriptor,
    config: HttpConfig,
    agent: ureq::Agent,
    calls: AtomicU64,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        HttpBackend {
            descriptor: BackendDescriptor::http(config.endpoint.clone(), config.model.clone()),
            config,
            agent,
            calls: AtomicU64::new(0),
        }
    }

    pub fn request_body(&self, request: &CompletionRequest) -> Value {
        json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_chars.div_ceil(CHARS_PER_TOKEN).max(1),
        })
    }

    fn attempt(&self, body: &Value) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let mut req = self.agent.post(&self.config.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| BackendError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(BackendError::Status { status, body: text.chars().take(500).collect() });
        }
        extract(&text, &self.config.response_pointer)
    }
}

pub(crate) fn extract(body: &str, pointer: &str) -> Result<String, BackendError> {
    let value: Value = serde_json::from_str(body).map_err(|e| BackendError::Malformed(e.to_string()))?;
    match value.pointer(pointer) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(other) => Err(BackendError::Malformed(format!("{pointer} is not a string: {other}"))),
        None => Err(BackendError::Malformed(format!("no value at {pointer}"))),
    }
}

impl Backend for HttpBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        let body = self.request_body(request);
        let text = with_retry(&self.config.retry, |_| self.attempt(&body))?;
        Ok(text.chars().take(request.max_output_chars).collect())
    }

    fn network_calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}
