use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::backend::{with_retry, BackendError, RetryPolicy};

const BUILTIN_LEXICON: &str = include_str!("../../data/toxicity_lexicon.txt");

pub const TOXICITY: &str = "toxicity";
pub const PERSPECTIVE_KEY_ENV: &str = "PERSPECTIVE_API_KEY";
pub const PERSPECTIVE_ENDPOINT: &str = "https://commentanalyzer.googleapis.com/v1alpha1/comments:analyze";
pub const PERSPECTIVE_CATEGORIES: [&str; 6] =
    ["toxicity", "severe_toxicity", "insult", "profanity", "threat", "identity_attack"];

/// Set of lowercase offensive terms.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    terms: HashSet<String>,
}

impl Lexicon {
    pub fn new<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Lexicon { terms: terms.into_iter().map(|t| t.as_ref().trim().to_lowercase()).filter(|t| !t.is_empty()).collect() }
    }

    /// Parses one term per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        Lexicon::new(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')))
    }

    pub fn builtin() -> Self {
        Lexicon::parse(BUILTIN_LEXICON)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.terms.contains(word)
    }

    /// Matched tokens over all tokens, in `[0, 1]`; empty text scores 0.
    pub fn score(&self, text: &str) -> f64 {
        let mut total = 0usize;
        let mut hits = 0usize;
        for token in text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            total += 1;
            if self.terms.contains(&token.to_lowercase()) {
                hits += 1;
            }
        }
        if total == 0 {
            0.0
        } else {
            (hits as f64 / total as f64).clamp(0.0, 1.0)
        }
    }
}

pub trait ToxicityScorer: Send + Sync {
    fn categories(&self) -> Vec<String>;
    fn score(&self, text: &str) -> Result<BTreeMap<String, f64>, BackendError>;
}

pub struct LexiconScorer {
    pub lexicon: Lexicon,
}

impl LexiconScorer {
    pub fn builtin() -> Self {
        LexiconScorer { lexicon: Lexicon::builtin() }
    }
}

impl ToxicityScorer for LexiconScorer {
    fn categories(&self) -> Vec<String> {
        vec![TOXICITY.to_string()]
    }

    fn score(&self, text: &str) -> Result<BTreeMap<String, f64>, BackendError> {
        Ok(BTreeMap::from([(TOXICITY.to_string(), self.lexicon.score(text))]))
    }
}

/// Client for the comment-analysis web API.
pub struct PerspectiveScorer {
    endpoint: String,
    api_key: String,
    retry: RetryPolicy,
    agent: ureq::Agent,
    calls: AtomicU64,
}

impl PerspectiveScorer {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>, retry: RetryPolicy) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        PerspectiveScorer { endpoint: endpoint.into(), api_key: api_key.into(), retry, agent, calls: AtomicU64::new(0) }
    }

    pub fn from_env(endpoint: Option<String>) -> Result<Self, BackendError> {
        let key = std::env::var(PERSPECTIVE_KEY_ENV)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| BackendError::Config(format!("{PERSPECTIVE_KEY_ENV} unset")))?;
        Ok(PerspectiveScorer::new(endpoint.unwrap_or_else(|| PERSPECTIVE_ENDPOINT.to_string()), key, RetryPolicy::default()))
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn request_body(text: &str) -> Value {
        let attributes: serde_json::Map<String, Value> =
            PERSPECTIVE_CATEGORIES.iter().map(|c| (c.to_uppercase(), json!({}))).collect();
        json!({
            "comment": {"text": text},
            "languages": ["en"],
            "requestedAttributes": attributes,
            "doNotStore": true,
        })
    }

    pub fn parse_response(body: &str) -> Result<BTreeMap<String, f64>, BackendError> {
        let value: Value = serde_json::from_str(body).map_err(|e| BackendError::Malformed(e.to_string()))?;
        PERSPECTIVE_CATEGORIES
            .iter()
            .map(|c| {
                let pointer = format!("/attributeScores/{}/summaryScore/value", c.to_uppercase());
                value
                    .pointer(&pointer)
                    .and_then(Value::as_f64)
                    .map(|v| (c.to_string(), v.clamp(0.0, 1.0)))
                    .ok_or_else(|| BackendError::Malformed(format!("missing {pointer}")))
            })
            .collect()
    }

    fn attempt(&self, body: &Value) -> Result<BTreeMap<String, f64>, BackendError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .query("key", &self.api_key)
            .header("Content-Type", "application/json")
            .send_json(body)
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| BackendError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(BackendError::Status { status, body: text.chars().take(500).collect() });
        }
        PerspectiveScorer::parse_response(&text)
    }
}

impl ToxicityScorer for PerspectiveScorer {
    fn categories(&self) -> Vec<String> {
        PERSPECTIVE_CATEGORIES.iter().map(|c| c.to_string()).collect()
    }

    fn score(&self, text: &str) -> Result<BTreeMap<String, f64>, BackendError> {
        let body = PerspectiveScorer::request_body(text);
        with_retry(&self.retry, |_| self.attempt(&body))
    }
}

pub fn toxicity_score(text: &str, scorer: &dyn ToxicityScorer) -> Result<BTreeMap<String, f64>, BackendError> {
    scorer.score(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToxicityReport {
    pub mean: BTreeMap<String, f64>,
    pub n_scored: usize,
    pub skipped: Vec<usize>,
}

/// Mean score per category; records whose scoring fails are skipped and logged.
pub fn score_corpus(texts: &[String], scorer: &dyn ToxicityScorer) -> ToxicityReport {
    let mut sums: BTreeMap<String, f64> = scorer.categories().into_iter().map(|c| (c, 0.0)).collect();
    let mut n = 0usize;
    let mut skipped = Vec::new();
    for (i, text) in texts.iter().enumerate() {
        match scorer.score(text) {
            Ok(scores) => {
                n += 1;
                for (k, v) in scores {
                    *sums.entry(k).or_insert(0.0) += v;
                }
            }
            Err(e) => {
                log::warn!("toxicity scoring failed for record {i}: {e}");
                skipped.push(i);
            }
        }
    }
    let mean = sums.into_iter().map(|(k, s)| (k, if n == 0 { 0.0 } else { s / n as f64 })).collect();
    ToxicityReport { mean, n_scored: n, skipped }
}
