//! Paired PII-positive / PII-negative sentences, few-shot banks, and SFT
//! exports built from a static template bank.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{PlaceholderPolicy, RefinementTask, TaskKind};
use crate::format::{strip_delimiters, Catalog, FormatError, FormatSpec, PiiValue};
use crate::rng;

const PII_SLOT: &str = "{pii}";
const VALUE_SLOT: &str = "{value}";
const TYPE_SLOT: &str = "{pii_type}";

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("template {template_id}: {reason}")]
    Template { template_id: String, reason: String },
    #[error("template file line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("template {0} has the wrong polarity")]
    Polarity(String),
    #[error("template {template_id} {expectation}")]
    TypeName { template_id: String, expectation: &'static str },
    #[error("no {0:?} templates available")]
    EmptyBank(Polarity),
    #[error("n_per_category must be even and at least 2, got {0}")]
    Count(usize),
    #[error(transparent)]
    Format(#[from] FormatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceTemplate {
    pub template_id: String,
    pub polarity: Polarity,
    pub style: String,
    pub text: String,
}

impl SentenceTemplate {
    /// Checks slot structure: positives carry one `{pii}` and at most one
    /// `{pii_type}`, negatives one `{value}` and no type slot. Digits are
    /// rejected so no template can pin down the value's length.
    pub fn new(
        template_id: impl Into<String>,
        polarity: Polarity,
        style: impl Into<String>,
        text: impl Into<String>,
    ) -> Result<Self, BenchmarkError> {
        let template = SentenceTemplate { template_id: template_id.into(), polarity, style: style.into(), text: text.into() };
        let bad = |reason: &str| BenchmarkError::Template { template_id: template.template_id.clone(), reason: reason.into() };
        let pii = template.text.matches(PII_SLOT).count();
        let value = template.text.matches(VALUE_SLOT).count();
        let typed = template.text.matches(TYPE_SLOT).count();
        match polarity {
            Polarity::Positive if pii != 1 || value != 0 => return Err(bad("needs exactly one {pii} slot")),
            Polarity::Positive if typed > 1 => return Err(bad("at most one {pii_type} slot")),
            Polarity::Negative if value != 1 || pii != 0 => return Err(bad("needs exactly one {value} slot")),
            Polarity::Negative if typed != 0 => return Err(bad("negative templates cannot name a type")),
            _ => {}
        }
        if template.text.chars().any(|c| c.is_ascii_digit()) {
            return Err(bad("contains digits"));
        }
        Ok(template)
    }

    pub fn has_type_slot(&self) -> bool {
        self.text.contains(TYPE_SLOT)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkSentence {
    pub sentence_id: String,
    pub category_id: String,
    pub polarity: Polarity,
    pub text: String,
    pub ground_truth: String,
    /// Character offsets `[start, end)` of `ground_truth` in `text`.
    pub span: (usize, usize),
    pub mentions_type: bool,
}

impl BenchmarkSentence {
    pub fn span_text(&self) -> String {
        self.text.chars().skip(self.span.0).take(self.span.1 - self.span.0).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemplateBank {
    templates: Vec<SentenceTemplate>,
}

static BUILTIN_TEMPLATES: &str = include_str!("../data/templates.tsv");

/// Parses the tab-separated template file: `template_id polarity style text`.
pub fn parse_templates(text: &str) -> Result<Vec<SentenceTemplate>, BenchmarkError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.splitn(4, '\t').collect();
        if fields.len() != 4 {
            return Err(BenchmarkError::Parse { line: i + 1, reason: "expected 4 tab-separated fields".into() });
        }
        let polarity = match fields[1] {
            "positive" => Polarity::Positive,
            "negative" => Polarity::Negative,
            other => return Err(BenchmarkError::Parse { line: i + 1, reason: format!("unknown polarity {other:?}") }),
        };
        out.push(SentenceTemplate::new(fields[0], polarity, fields[2], fields[3])?);
    }
    Ok(out)
}

impl TemplateBank {
    pub fn builtin() -> Self {
        TemplateBank::parse(BUILTIN_TEMPLATES).expect("bundled templates are valid")
    }

    pub fn parse(text: &str) -> Result<Self, BenchmarkError> {
        Ok(TemplateBank { templates: parse_templates(text)? })
    }

    pub fn new(templates: Vec<SentenceTemplate>) -> Self {
        TemplateBank { templates }
    }

    pub fn templates(&self) -> &[SentenceTemplate] {
        &self.templates
    }

    /// Keeps the first `n` templates of each kind (plain positive, typed
    /// positive, negative), which controls template reuse.
    pub fn limit(&self, n: usize) -> TemplateBank {
        let mut counts = [0usize; 3];
        let templates = self
            .templates
            .iter()
            .filter(|t| {
                let k = match (t.polarity, t.has_type_slot()) {
                    (Polarity::Positive, false) => 0,
                    (Polarity::Positive, true) => 1,
                    (Polarity::Negative, _) => 2,
                };
                counts[k] += 1;
                counts[k] <= n
            })
            .cloned()
            .collect();
        TemplateBank { templates }
    }

    fn pick(&self, polarity: Polarity, typed: Option<bool>) -> Vec<&SentenceTemplate> {
        self.templates
            .iter()
            .filter(|t| t.polarity == polarity && typed.is_none_or(|ty| t.has_type_slot() == ty))
            .collect()
    }
}

fn substitute(text: &str, slot: &str, value: &str) -> (String, (usize, usize)) {
    let at = text.find(slot).expect("validated slot");
    let start = text[..at].chars().count();
    let out = format!("{}{}{}", &text[..at], value, &text[at + slot.len()..]);
    (out, (start, start + value.chars().count()))
}

/// Inserts `value.raw` into a positive template. The returned sentence has
/// an empty `sentence_id`.
pub fn render_positive(
    template: &SentenceTemplate,
    value: &PiiValue,
    type_name: Option<&str>,
) -> Result<BenchmarkSentence, BenchmarkError> {
    if template.polarity != Polarity::Positive {
        return Err(BenchmarkError::Polarity(template.template_id.clone()));
    }
    let text = match (template.has_type_slot(), type_name) {
        (true, Some(name)) => template.text.replacen(TYPE_SLOT, name, 1),
        (false, None) => template.text.clone(),
        (true, None) => {
            return Err(BenchmarkError::TypeName { template_id: template.template_id.clone(), expectation: "needs a type name" })
        }
        (false, Some(_)) => {
            return Err(BenchmarkError::TypeName { template_id: template.template_id.clone(), expectation: "has no {pii_type} slot" })
        }
    };
    let (text, span) = substitute(&text, PII_SLOT, &value.raw);
    Ok(BenchmarkSentence {
        sentence_id: String::new(),
        category_id: value.category_id.clone(),
        polarity: Polarity::Positive,
        text,
        ground_truth: value.raw.clone(),
        span,
        mentions_type: type_name.is_some(),
    })
}

/// Inserts the delimiter-stripped digits of `value` into a negative template.
pub fn render_negative(
    template: &SentenceTemplate,
    spec: &FormatSpec,
    value: &PiiValue,
) -> Result<BenchmarkSentence, BenchmarkError> {
    if template.polarity != Polarity::Negative {
        return Err(BenchmarkError::Polarity(template.template_id.clone()));
    }
    let digits = strip_delimiters(spec, &value.raw)?;
    let (text, span) = substitute(&template.text, VALUE_SLOT, &digits);
    Ok(BenchmarkSentence {
        sentence_id: String::new(),
        category_id: value.category_id.clone(),
        polarity: Polarity::Negative,
        text,
        ground_truth: digits,
        span,
        mentions_type: false,
    })
}

fn choose<'a>(pool: &[&'a SentenceTemplate], seed: u64, labels: &[&str]) -> &'a SentenceTemplate {
    let mut r = rng::stream(seed, labels);
    pool.choose(&mut r).expect("non-empty pool")
}

fn require_pools(bank: &TemplateBank, negatives: bool) -> Result<[Vec<&SentenceTemplate>; 3], BenchmarkError> {
    let plain = bank.pick(Polarity::Positive, Some(false));
    let typed = bank.pick(Polarity::Positive, Some(true));
    let neg = bank.pick(Polarity::Negative, None);
    if plain.is_empty() || typed.is_empty() {
        return Err(BenchmarkError::EmptyBank(Polarity::Positive));
    }
    if negatives && neg.is_empty() {
        return Err(BenchmarkError::EmptyBank(Polarity::Negative));
    }
    Ok([plain, typed, neg])
}

/// Builds `n_per_category` positives per category, alternating between
/// plain and type-naming templates, plus one paired negative per positive
/// for numeric categories. Output is ordered by category id, then index.
pub fn build_benchmark(
    catalog: &Catalog,
    bank: &TemplateBank,
    n_per_category: usize,
    seed: u64,
) -> Result<Vec<BenchmarkSentence>, BenchmarkError> {
    if n_per_category < 2 || !n_per_category.is_multiple_of(2) {
        return Err(BenchmarkError::Count(n_per_category));
    }
    let any_numeric = catalog.specs().iter().any(|s| s.numeric_only);
    let [plain, typed, neg] = require_pools(bank, any_numeric)?;
    let mut specs: Vec<&FormatSpec> = catalog.specs().iter().collect();
    specs.sort_by(|a, b| a.category_id.cmp(&b.category_id));

    let per_category: Vec<Result<Vec<BenchmarkSentence>, BenchmarkError>> = specs
        .par_iter()
        .map(|spec| {
            let id = spec.category_id.as_str();
            let mut out = Vec::with_capacity(n_per_category * 2);
            for i in 0..n_per_category {
                let idx = i.to_string();
                let value = spec.generate(rng::derive_seed(seed, &["bench", id, &idx]));
                let mentions_type = i % 2 == 1;
                let (pool, name) = if mentions_type { (&typed, Some(spec.display_name.as_str())) } else { (&plain, None) };
                let template = choose(pool, seed, &["bench-template", "positive", id, &idx]);
                let mut pos = render_positive(template, &value, name)?;
                pos.sentence_id = format!("{id}-pos-{i:05}");
                out.push(pos);
                if spec.numeric_only {
                    let template = choose(&neg, seed, &["bench-template", "negative", id, &idx]);
                    let mut n = render_negative(template, spec, &value)?;
                    n.sentence_id = format!("{id}-neg-{i:05}");
                    out.push(n);
                }
            }
            Ok(out)
        })
        .collect();
    let mut out = Vec::new();
    for chunk in per_category {
        out.extend(chunk?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shot {
    pub input: String,
    pub output: String,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotBank {
    pub shots: Vec<Shot>,
}

impl ShotBank {
    pub fn is_empty(&self) -> bool {
        self.shots.is_empty()
    }

    pub fn len(&self) -> usize {
        self.shots.len()
    }

    pub fn count(&self, polarity: Polarity) -> usize {
        self.shots.iter().filter(|s| s.polarity == polarity).count()
    }
}

struct Sampler<'a> {
    specs: Vec<&'a FormatSpec>,
    numeric: Vec<&'a FormatSpec>,
    pools: [Vec<&'a SentenceTemplate>; 3],
    policy: PlaceholderPolicy,
}

impl<'a> Sampler<'a> {
    fn new(catalog: &'a Catalog, bank: &'a TemplateBank, negatives: bool) -> Result<Self, BenchmarkError> {
        let mut specs: Vec<&FormatSpec> = catalog.specs().iter().collect();
        specs.sort_by(|a, b| a.category_id.cmp(&b.category_id));
        let numeric = specs.iter().copied().filter(|s| s.numeric_only).collect();
        Ok(Sampler { specs, numeric, pools: require_pools(bank, negatives)?, policy: PlaceholderPolicy::default() })
    }

    fn positive(&self, seed: u64, stream: &str, j: usize) -> Shot {
        let idx = j.to_string();
        let mut r = rng::stream(seed, &[stream, "positive", &idx]);
        let spec = *self.specs.choose(&mut r).expect("catalog not empty");
        let value = spec.generate(rng::derive_seed(seed, &[stream, "value", &idx]));
        let typed = j % 2 == 1;
        let pool = if typed { &self.pools[1] } else { &self.pools[0] };
        let template = pool.choose(&mut r).expect("non-empty pool");
        let name = typed.then_some(spec.display_name.as_str());
        let s = render_positive(template, &value, name).expect("validated template");
        let chars: Vec<char> = s.text.chars().collect();
        let output: String = chars[..s.span.0]
            .iter()
            .copied()
            .chain(self.policy.placeholder_for(&s.ground_truth).chars())
            .chain(chars[s.span.1..].iter().copied())
            .collect();
        Shot { input: s.text, output, polarity: Polarity::Positive }
    }

    fn negative(&self, seed: u64, stream: &str, j: usize) -> Option<Shot> {
        let idx = j.to_string();
        let mut r = rng::stream(seed, &[stream, "negative", &idx]);
        let spec = *self.numeric.choose(&mut r)?;
        let value = spec.generate(rng::derive_seed(seed, &[stream, "value-neg", &idx]));
        let template = self.pools[2].choose(&mut r)?;
        let s = render_negative(template, spec, &value).expect("numeric spec");
        Some(Shot { output: s.text.clone(), input: s.text, polarity: Polarity::Negative })
    }
}

/// Few-shot bank drawn from the `"shots"` seed streams, which never overlap
/// with benchmark streams. Positives and negatives are interleaved.
pub fn build_shot_bank(
    catalog: &Catalog,
    bank: &TemplateBank,
    k_pos: usize,
    k_neg: usize,
    seed: u64,
) -> Result<ShotBank, BenchmarkError> {
    if k_pos == 0 && k_neg == 0 {
        return Ok(ShotBank::default());
    }
    let sampler = Sampler::new(catalog, bank, k_neg > 0)?;
    let mut shots = Vec::with_capacity(k_pos + k_neg);
    for j in 0..k_pos.max(k_neg) {
        if j < k_pos {
            shots.push(sampler.positive(seed, "shots", j));
        }
        if j < k_neg {
            shots.extend(sampler.negative(seed, "shots", j));
        }
    }
    Ok(ShotBank { shots })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftPair {
    pub prompt: String,
    pub target: String,
}

/// `n` zero-shot prompt/target pairs, alternating positive and negative
/// sentences when the catalog has numeric categories.
pub fn export_sft(catalog: &Catalog, bank: &TemplateBank, n: usize, seed: u64) -> Result<Vec<SftPair>, BenchmarkError> {
    let any_numeric = catalog.specs().iter().any(|s| s.numeric_only);
    let sampler = Sampler::new(catalog, bank, any_numeric)?;
    let task = RefinementTask::new(TaskKind::PiiSentence);
    let pairs = (0..n)
        .into_par_iter()
        .map(|i| {
            let shot = if i % 2 == 1 && any_numeric {
                sampler.negative(seed, "sft", i).expect("numeric categories exist")
            } else {
                sampler.positive(seed, "sft", i)
            };
            let prompt = task.build_prompt(&shot.input).expect("non-empty sentence");
            SftPair { prompt, target: shot.output }
        })
        .collect();
    Ok(pairs)
}
