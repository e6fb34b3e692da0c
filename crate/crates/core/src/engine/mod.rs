//! Prompt assembly, per-record refinement through a backend, placeholder
//! verification and drift.

pub mod drift;
pub mod placeholder;
pub mod prompts;

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::{Backend, CompletionRequest, OracleHint, RequestContext};
use crate::benchmark::ShotBank;

pub use drift::{drift, edit_distance};
pub use placeholder::{
    counting_digits, cycling_digits, cycling_letters, NoReason, PlaceholderCheck, PlaceholderPolicy, PlaceholderVerdict,
};

pub const SOM: &str = "<|SOM|>";
pub const EOM: &str = "<|EOM|>";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("template must contain exactly one {slot} slot, found {found}")]
    SlotCount { slot: &'static str, found: usize },
    #[error("shots are not supported for {0:?}")]
    ShotsUnsupported(TaskKind),
    #[error("input is empty")]
    EmptyInput,
    #[error("detox input must wrap each message in <|SOM|> ... <|EOM|>")]
    MissingMarkers,
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    PiiSentence,
    CompaniesJson,
    CodeLine,
    DetoxPair,
}

impl TaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::PiiSentence => "pii_sentence",
            TaskKind::CompaniesJson => "companies_json",
            TaskKind::CodeLine => "code_line",
            TaskKind::DetoxPair => "detox_pair",
        }
    }

    pub fn slot(&self) -> &'static str {
        match self {
            TaskKind::CompaniesJson => "{json}",
            _ => "{text}",
        }
    }

    pub fn default_template(&self) -> &'static str {
        match self {
            TaskKind::PiiSentence => prompts::PII_SENTENCE,
            TaskKind::CompaniesJson => prompts::COMPANIES_JSON,
            TaskKind::CodeLine => prompts::CODE_LINE,
            TaskKind::DetoxPair => prompts::DETOX_PAIR,
        }
    }

    pub fn accepts_shots(&self) -> bool {
        matches!(self, TaskKind::PiiSentence | TaskKind::CodeLine)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementTask {
    pub kind: TaskKind,
    template: String,
    shots: ShotBank,
}

impl RefinementTask {
    pub fn new(kind: TaskKind) -> Self {
        RefinementTask { kind, template: kind.default_template().to_string(), shots: ShotBank::default() }
    }

    pub fn with_template(kind: TaskKind, template: impl Into<String>) -> Result<Self, EngineError> {
        let template = template.into();
        let found = template.matches(kind.slot()).count();
        if found != 1 {
            return Err(EngineError::SlotCount { slot: kind.slot(), found });
        }
        Ok(RefinementTask { kind, template, shots: ShotBank::default() })
    }

    pub fn with_shots(mut self, shots: ShotBank) -> Result<Self, EngineError> {
        if !shots.is_empty() && !self.kind.accepts_shots() {
            return Err(EngineError::ShotsUnsupported(self.kind));
        }
        self.shots = shots;
        Ok(self)
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    pub fn shots(&self) -> &ShotBank {
        &self.shots
    }

    /// Substitutes `input` into the slot. Shots go in as `Input:/Output:`
    /// blocks just before the paragraph holding the final directive.
    pub fn build_prompt(&self, input: &str) -> Result<String, EngineError> {
        if input.trim().is_empty() {
            return Err(EngineError::EmptyInput);
        }
        if self.kind == TaskKind::DetoxPair && !(input.contains(SOM) && input.contains(EOM)) {
            return Err(EngineError::MissingMarkers);
        }
        let at = self.template.find(self.kind.slot()).expect("validated slot");
        let (head, tail) = (&self.template[..at], &self.template[at + self.kind.slot().len()..]);
        let mut prompt = String::with_capacity(self.template.len() + input.len() + 256);
        if self.shots.is_empty() {
            prompt.push_str(head);
        } else {
            let slot_par = head.rfind("\n\n").map(|i| i + 2).unwrap_or(0);
            let directive = head[..slot_par.saturating_sub(2)].rfind("\n\n").map(|i| i + 2).unwrap_or(0);
            prompt.push_str(&head[..directive]);
            let blocks: Vec<String> =
                self.shots.shots.iter().map(|s| format!("Input: {}\nOutput: {}", s.input, s.output)).collect();
            prompt.push_str(&blocks.join("\n\n"));
            prompt.push_str("\n\n");
            prompt.push_str(&head[directive..]);
        }
        prompt.push_str(input);
        prompt.push_str(tail);
        Ok(prompt)
    }
}

pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Trims whitespace and a wrapping triple-backtick fence. Code lines keep
/// the input's own leading and trailing whitespace.
pub fn sanitize(kind: TaskKind, input: &str, raw: &str) -> String {
    let mut text = raw.trim();
    if text.len() > 6 && text.starts_with("```") && text.ends_with("```") && text.contains('\n') {
        let inner = &text[3..text.len() - 3];
        let body = inner.find('\n').map(|i| &inner[i + 1..]).unwrap_or(inner);
        text = body.trim();
    }
    if kind == TaskKind::CodeLine {
        let lead = &input[..input.len() - input.trim_start().len()];
        let trail = &input[input.trim_end().len()..];
        format!("{lead}{text}{trail}")
    } else {
        text.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineInput {
    pub record_id: String,
    pub input: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint: Option<OracleHint>,
}

impl RefineInput {
    pub fn new(record_id: impl Into<String>, input: impl Into<String>) -> Self {
        RefineInput { record_id: record_id.into(), input: input.into(), hint: None }
    }

    pub fn with_hint(mut self, hint: OracleHint) -> Self {
        self.hint = Some(hint);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRecord {
    pub record_id: String,
    pub input: String,
    pub output: String,
    pub task_kind: TaskKind,
    pub backend_id: String,
    pub prompt_hash: String,
    pub drift: f64,
    pub placeholder_ok: PlaceholderVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placeholder_reason: Option<NoReason>,
    pub failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineOptions {
    pub temperature: f64,
    /// Output cap; `None` allows four times the input plus a fixed margin.
    pub max_output_chars: Option<usize>,
    pub max_in_flight: usize,
    pub policy: PlaceholderPolicy,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { temperature: 0.0, max_output_chars: None, max_in_flight: 8, policy: PlaceholderPolicy::default() }
    }
}

fn char_slice(s: &str, span: (usize, usize)) -> String {
    s.chars().skip(span.0).take(span.1.saturating_sub(span.0)).collect()
}

/// Placeholder verdict for one output given the ground truth, if any.
pub fn check_placeholders(policy: &PlaceholderPolicy, input: &str, output: &str, hint: Option<&OracleHint>) -> PlaceholderCheck {
    match hint {
        Some(OracleHint::Pii { value, positive: true, .. }) => policy.verify(input, value, output),
        Some(OracleHint::Spans { spans }) => {
            PlaceholderCheck::all(spans.iter().map(|&s| policy.verify(input, &char_slice(input, s), output)))
        }
        _ => PlaceholderCheck::NotApplicable,
    }
}

/// Sends one record through `backend`. Backend failures yield a record
/// with `failed = true` and the input copied to the output.
pub fn refine_record(item: &RefineInput, task: &RefinementTask, backend: &dyn Backend, options: &RefineOptions) -> RefinementRecord {
    let backend_id = backend.descriptor().backend_id.clone();
    let failed = |prompt_hash: String, error: String| RefinementRecord {
        record_id: item.record_id.clone(),
        input: item.input.clone(),
        output: item.input.clone(),
        task_kind: task.kind,
        backend_id: backend_id.clone(),
        prompt_hash,
        drift: 0.0,
        placeholder_ok: PlaceholderVerdict::NotApplicable,
        placeholder_reason: None,
        failed: true,
        error: Some(error),
    };
    let prompt = match task.build_prompt(&item.input) {
        Ok(p) => p,
        Err(e) => return failed(String::new(), e.to_string()),
    };
    let hash = prompt_hash(&prompt);
    let limit = options.max_output_chars.unwrap_or(item.input.chars().count() * 4 + 2048);
    let request = CompletionRequest::new(prompt, &backend_id, options.temperature, limit)
        .with_context(RequestContext { input: item.input.clone(), hint: item.hint.clone() });
    match backend.complete(&request) {
        Ok(raw) => {
            let output = sanitize(task.kind, &item.input, &raw);
            let (placeholder_ok, placeholder_reason) =
                check_placeholders(&options.policy, &item.input, &output, item.hint.as_ref()).split();
            RefinementRecord {
                record_id: item.record_id.clone(),
                drift: drift(&item.input, &output),
                input: item.input.clone(),
                output,
                task_kind: task.kind,
                backend_id,
                prompt_hash: hash,
                placeholder_ok,
                placeholder_reason,
                failed: false,
                error: None,
            }
        }
        Err(e) => {
            log::warn!("record {} failed: {e}", item.record_id);
            failed(hash, e.to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureEntry {
    pub index: usize,
    pub record_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RefinedDataset {
    /// One record per input, in input order; failures included and marked.
    pub records: Vec<RefinementRecord>,
    pub failures: Vec<FailureEntry>,
}

impl RefinedDataset {
    pub fn succeeded(&self) -> impl Iterator<Item = &RefinementRecord> {
        self.records.iter().filter(|r| !r.failed)
    }
}

/// Refines every item with at most `max_in_flight` concurrent requests.
/// Output order always matches input order.
pub fn refine_dataset(
    items: &[RefineInput],
    task: &RefinementTask,
    backend: &dyn Backend,
    options: &RefineOptions,
) -> Result<RefinedDataset, EngineError> {
    let mut seen = HashSet::with_capacity(items.len());
    for item in items {
        if !seen.insert(item.record_id.as_str()) {
            return Err(EngineError::DuplicateId(item.record_id.clone()));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.max_in_flight.max(1))
        .build()
        .map_err(|e| EngineError::Pool(e.to_string()))?;
    let records: Vec<RefinementRecord> =
        pool.install(|| items.par_iter().map(|item| refine_record(item, task, backend, options)).collect());
    let failures = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.failed)
        .map(|(index, r)| FailureEntry { index, record_id: r.record_id.clone(), error: r.error.clone().unwrap_or_default() })
        .collect();
    Ok(RefinedDataset { records, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{BackendDescriptor, BackendError, BackendKind, IdentityBackend, OracleBackend};
    use crate::benchmark::{Polarity, Shot};

    fn shots(k_pos: usize, k_neg: usize) -> ShotBank {
        let mut shots = Vec::new();
        for j in 0..k_pos.max(k_neg) {
            if j < k_pos {
                shots.push(Shot { input: format!("id {j}"), output: "id a".into(), polarity: Polarity::Positive });
            }
            if j < k_neg {
                shots.push(Shot { input: format!("n {j}"), output: format!("n {j}"), polarity: Polarity::Negative });
            }
        }
        ShotBank { shots }
    }

    #[test]
    fn zero_shot_prompt_is_template_plus_input() {
        let p = RefinementTask::new(TaskKind::PiiSentence).build_prompt("My info: 130596315").unwrap();
        assert_eq!(p, prompts::PII_SENTENCE.replace("{text}", "My info: 130596315"));
        assert!(p.ends_with("Apply these instructions to this text:\n\nMy info: 130596315"));
    }

    #[test]
    fn shots_go_before_the_directive() {
        let task = RefinementTask::new(TaskKind::PiiSentence).with_shots(shots(2, 2)).unwrap();
        let p = task.build_prompt("hello 1").unwrap();
        assert_eq!(p.matches("Input: ").count(), 4);
        assert_eq!(p.matches("\nOutput: ").count(), 4);
        let first_shot = p.find("Input: id 0").unwrap();
        let neg = p.find("Input: n 0").unwrap();
        let second = p.find("Input: id 1").unwrap();
        assert!(first_shot < neg && neg < second);
        let directive = p.find("Apply these instructions to this text:").unwrap();
        assert!(p.find("Input: n 1").unwrap() < directive);
        assert!(p.find("Respond only with the final sentence").unwrap() < first_shot);
        assert!(p.ends_with("text:\n\nhello 1"));

        let code = RefinementTask::new(TaskKind::CodeLine).with_shots(shots(1, 1)).unwrap();
        let p = code.build_prompt("x = 1").unwrap();
        let at = p.find("Input: id 0").unwrap();
        assert!(p.find("Explanation: The accessToken").unwrap() < at);
        assert!(at < p.find("Respond only with the final sentence").unwrap());
    }

    #[test]
    fn shots_rejected_for_other_tasks() {
        let err = RefinementTask::new(TaskKind::DetoxPair).with_shots(shots(1, 0)).unwrap_err();
        assert_eq!(err, EngineError::ShotsUnsupported(TaskKind::DetoxPair));
        assert!(RefinementTask::new(TaskKind::CompaniesJson).with_shots(ShotBank::default()).is_ok());
    }

    #[test]
    fn template_slot_validation() {
        assert!(RefinementTask::with_template(TaskKind::PiiSentence, "no slot").is_err());
        assert!(RefinementTask::with_template(TaskKind::PiiSentence, "{text} {text}").is_err());
        assert!(RefinementTask::with_template(TaskKind::CompaniesJson, "JSON: {json}").is_ok());
        assert!(RefinementTask::new(TaskKind::PiiSentence).build_prompt("  ").is_err());
    }

    #[test]
    fn detox_prompt_needs_markers() {
        let task = RefinementTask::new(TaskKind::DetoxPair);
        assert_eq!(task.build_prompt("plain"), Err(EngineError::MissingMarkers));
        let p = task.build_prompt("<|SOM|>a<|EOM|><|SOM|>b<|EOM|>").unwrap();
        assert!(p.matches(SOM).count() >= 2);
    }

    #[test]
    fn every_builtin_template_has_one_slot() {
        for kind in [TaskKind::PiiSentence, TaskKind::CompaniesJson, TaskKind::CodeLine, TaskKind::DetoxPair] {
            assert_eq!(kind.default_template().matches(kind.slot()).count(), 1, "{kind:?}");
        }
    }

    #[test]
    fn sanitation() {
        assert_eq!(sanitize(TaskKind::PiiSentence, "x", "  hi there \n"), "hi there");
        assert_eq!(sanitize(TaskKind::PiiSentence, "x", "```\nhi\n```"), "hi");
        assert_eq!(sanitize(TaskKind::PiiSentence, "x", "```text\nhi\n```\n"), "hi");
        assert_eq!(sanitize(TaskKind::CodeLine, "    key = 1\r", "key = 2"), "    key = 2\r");
        assert_eq!(sanitize(TaskKind::CodeLine, "```", "```"), "```");
    }

    #[test]
    fn identity_refinement_has_zero_drift() {
        let item = RefineInput::new("r1", "Dude, this galaxy has, like, 81404096586 planets");
        let r = refine_record(&item, &RefinementTask::new(TaskKind::PiiSentence), &IdentityBackend::default(), &RefineOptions::default());
        assert_eq!(r.output, item.input);
        assert_eq!(r.drift, 0.0);
        assert_eq!(r.placeholder_ok, PlaceholderVerdict::NotApplicable);
        assert!(!r.failed);
    }

    #[test]
    fn oracle_refinement_on_positive_and_negative() {
        let text = "My ID number is listed as 81404096586 in the registry.";
        let item = RefineInput::new("p", text)
            .with_hint(OracleHint::Pii { value: "81404096586".into(), span: (26, 37), positive: true });
        let task = RefinementTask::new(TaskKind::PiiSentence);
        let r = refine_record(&item, &task, &OracleBackend::default(), &RefineOptions::default());
        assert_eq!(r.output, "My ID number is listed as 12345678910 in the registry.");
        assert_eq!(r.placeholder_ok, PlaceholderVerdict::Yes);
        assert!(r.drift > 0.0);

        let neg = "Dude, this galaxy has, like, 81404096586 planets";
        let item = RefineInput::new("n", neg)
            .with_hint(OracleHint::Pii { value: "81404096586".into(), span: (29, 40), positive: false });
        let r = refine_record(&item, &task, &OracleBackend::default(), &RefineOptions::default());
        assert_eq!(r.output, neg);
        assert_eq!(r.drift, 0.0);
    }

    struct Flaky {
        descriptor: BackendDescriptor,
    }

    impl Backend for Flaky {
        fn descriptor(&self) -> &BackendDescriptor {
            &self.descriptor
        }

        fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
            let input = request.input();
            if input.ends_with('7') {
                Err(BackendError::Status { status: 500, body: "boom".into() })
            } else {
                std::thread::sleep(std::time::Duration::from_micros((input.len() % 5) as u64 * 200));
                Ok(input.to_uppercase())
            }
        }
    }

    #[test]
    fn dataset_order_and_failures() {
        let items: Vec<RefineInput> = (0..100).map(|i| RefineInput::new(format!("r{i}"), format!("item {i}"))).collect();
        let backend = Flaky { descriptor: BackendDescriptor::local(BackendKind::Identity) };
        let task = RefinementTask::new(TaskKind::PiiSentence);
        let out = refine_dataset(&items, &task, &backend, &RefineOptions { max_in_flight: 4, ..Default::default() }).unwrap();
        assert_eq!(out.records.len(), 100);
        for (i, r) in out.records.iter().enumerate() {
            assert_eq!(r.record_id, format!("r{i}"));
        }
        assert_eq!(out.failures.len(), 10);
        assert_eq!(out.succeeded().count(), 90);
        assert!(out.failures.iter().all(|f| f.record_id.ends_with('7')));
        assert!(refine_dataset(&[], &task, &backend, &RefineOptions::default()).unwrap().records.is_empty());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let items = vec![RefineInput::new("a", "x"), RefineInput::new("a", "y")];
        let err = refine_dataset(&items, &RefinementTask::new(TaskKind::PiiSentence), &IdentityBackend::default(), &RefineOptions::default());
        assert_eq!(err.unwrap_err(), EngineError::DuplicateId("a".into()));
    }

    #[test]
    fn record_schema() {
        let item = RefineInput::new("r1", "hello");
        let r = refine_record(&item, &RefinementTask::new(TaskKind::PiiSentence), &IdentityBackend::default(), &RefineOptions::default());
        let v = serde_json::to_value(&r).unwrap();
        for key in ["record_id", "input", "output", "task_kind", "backend_id", "drift", "placeholder_ok", "failed"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["placeholder_ok"], "not_applicable");
        assert_eq!(v["task_kind"], "pii_sentence");
    }
}
