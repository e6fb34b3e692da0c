use std::sync::atomic::{AtomicU64, Ordering};

use super::{Backend, BackendDescriptor, BackendError, BackendKind, CompletionRequest, OracleHint};
use crate::engine::PlaceholderPolicy;
use crate::evaluation::Lexicon;
use crate::knowledge::{anonymize_company_json, detox_with_lexicon, DetoxOutput};

/// Computes the ideal refinement from ground truth attached to the request.
pub struct OracleBackend {
    descriptor: BackendDescriptor,
    policy: PlaceholderPolicy,
    lexicon: Lexicon,
    calls: AtomicU64,
}

impl Default for OracleBackend {
    fn default() -> Self {
        OracleBackend::new(PlaceholderPolicy::default(), Lexicon::builtin())
    }
}

impl OracleBackend {
    pub fn new(policy: PlaceholderPolicy, lexicon: Lexicon) -> Self {
        OracleBackend {
            descriptor: BackendDescriptor::local(BackendKind::Oracle),
            policy,
            lexicon,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    /// Replaces each character span with a same-length placeholder.
    pub fn replace_spans(&self, input: &str, spans: &[(usize, usize)]) -> Result<String, BackendError> {
        let chars: Vec<char> = input.chars().collect();
        let mut sorted = spans.to_vec();
        sorted.sort_unstable();
        let mut out = String::with_capacity(input.len());
        let mut at = 0;
        for (start, end) in sorted {
            if start < at || end < start || end > chars.len() {
                return Err(BackendError::BadGroundTruth(format!("span [{start}, {end}) does not fit")));
            }
            out.extend(&chars[at..start]);
            let original: String = chars[start..end].iter().collect();
            out.push_str(&self.policy.placeholder_for(&original));
            at = end;
        }
        out.extend(&chars[at..]);
        Ok(out)
    }
}

impl Backend for OracleBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let context = request.context.as_ref().ok_or(BackendError::MissingGroundTruth)?;
        let input = context.input.as_str();
        match context.hint.as_ref().ok_or(BackendError::MissingGroundTruth)? {
            OracleHint::Pii { positive: false, .. } => Ok(input.to_string()),
            OracleHint::Pii { value, span, positive: true } => {
                let found: String = input.chars().skip(span.0).take(span.1.saturating_sub(span.0)).collect();
                if &found != value {
                    return Err(BackendError::BadGroundTruth(format!("span holds {found:?}, expected {value:?}")));
                }
                self.replace_spans(input, &[*span])
            }
            OracleHint::Spans { spans } => self.replace_spans(input, spans),
            OracleHint::Companies => anonymize_company_json(input).map_err(|e| BackendError::BadGroundTruth(e.to_string())),
            OracleHint::Detox { facts, qa } => {
                let cleaned = detox_with_lexicon(input, &self.lexicon).map_err(|e| BackendError::BadGroundTruth(e.to_string()))?;
                Ok(DetoxOutput { facts: facts.clone(), qa_pairs: qa.clone(), cleaned_messages: cleaned }.render())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::RequestContext;

    fn ask(input: &str, hint: Option<OracleHint>) -> Result<String, BackendError> {
        let req = CompletionRequest::new(format!("p\n\n{input}"), "oracle", 0.0, 1000)
            .with_context(RequestContext { input: input.into(), hint });
        OracleBackend::default().complete(&req)
    }

    #[test]
    fn positive_value_becomes_counting_digits() {
        let text = "My ID number is listed as 81404096586 in the registry.";
        let start = text.find("814").unwrap();
        let hint = OracleHint::Pii { value: "81404096586".into(), span: (start, start + 11), positive: true };
        assert_eq!(ask(text, Some(hint)).unwrap(), "My ID number is listed as 12345678910 in the registry.");
    }

    #[test]
    fn negatives_are_untouched() {
        let text = "Dude, this galaxy has, like, 81404096586 planets";
        let hint = OracleHint::Pii { value: "81404096586".into(), span: (29, 40), positive: false };
        assert_eq!(ask(text, Some(hint)).unwrap(), text);
    }

    #[test]
    fn missing_or_wrong_ground_truth() {
        assert_eq!(ask("x", None), Err(BackendError::MissingGroundTruth));
        let hint = OracleHint::Pii { value: "999".into(), span: (0, 3), positive: true };
        assert!(matches!(ask("123 abc", Some(hint)), Err(BackendError::BadGroundTruth(_))));
        let hint = OracleHint::Spans { spans: vec![(0, 3), (2, 4)] };
        assert!(matches!(ask("abcdef", Some(hint)), Err(BackendError::BadGroundTruth(_))));
    }

    #[test]
    fn multiple_spans() {
        let hint = OracleHint::Spans { spans: vec![(13, 17), (0, 3)] };
        assert_eq!(ask("key = 'xyz' 'QWER';", Some(hint)).unwrap(), "abc = 'xyz' 'abcd';");
    }
}
