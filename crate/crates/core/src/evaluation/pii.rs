use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::reference::ReferenceFigures;
use crate::benchmark::{BenchmarkSentence, Polarity};
use crate::engine::RefinementRecord;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum JoinError {
    #[error("benchmark sentence {0} has no refined record")]
    MissingRecord(String),
    #[error("refined record {0} matches no benchmark sentence")]
    UnknownRecord(String),
}

fn alnum(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).collect()
}

/// A positive is removed when its value is gone verbatim, as its
/// delimiter-stripped form, and from the output's alphanumeric skeleton.
pub fn value_removed(ground_truth: &str, output: &str) -> bool {
    let stripped = alnum(ground_truth);
    !output.contains(ground_truth)
        && (stripped.is_empty() || (!output.contains(&stripped) && !alnum(output).contains(&stripped)))
}

/// A negative is preserved when its digit string survives verbatim.
pub fn value_preserved(ground_truth: &str, output: &str) -> bool {
    output.contains(ground_truth)
}

pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Unweighted,
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub recall: f64,
    /// Present only for categories with negatives.
    pub precision: Option<f64>,
    pub f_score: Option<f64>,
    /// Share of negatives left intact.
    pub negative_preservation: Option<f64>,
    pub n_pos: usize,
    pub n_neg: usize,
    pub hits: usize,
    pub false_positives: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub weighting: Weighting,
    pub recall: f64,
    pub precision: Option<f64>,
    pub f_score: Option<f64>,
    pub negative_preservation: Option<f64>,
    pub n_categories: usize,
    pub n_numeric_categories: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_category: BTreeMap<String, CategoryScore>,
    pub aggregate: Aggregate,
    pub reference: ReferenceFigures,
}

#[derive(Default)]
struct Tally {
    n_pos: usize,
    n_neg: usize,
    hits: usize,
    fp: usize,
    tn: usize,
    failed: usize,
}

/// Joins refined records to the benchmark by sentence id and counts hits,
/// false positives and preserved negatives per category.
fn tally(bench: &[BenchmarkSentence], refined: &[RefinementRecord]) -> Result<BTreeMap<String, Tally>, JoinError> {
    let by_id: HashMap<&str, &RefinementRecord> = refined.iter().map(|r| (r.record_id.as_str(), r)).collect();
    let known: HashMap<&str, ()> = bench.iter().map(|s| (s.sentence_id.as_str(), ())).collect();
    if let Some(extra) = refined.iter().find(|r| !known.contains_key(r.record_id.as_str())) {
        return Err(JoinError::UnknownRecord(extra.record_id.clone()));
    }
    let mut out: BTreeMap<String, Tally> = BTreeMap::new();
    for s in bench {
        let r = by_id.get(s.sentence_id.as_str()).ok_or_else(|| JoinError::MissingRecord(s.sentence_id.clone()))?;
        let t = out.entry(s.category_id.clone()).or_default();
        match s.polarity {
            Polarity::Positive => {
                t.n_pos += 1;
                if r.failed {
                    t.failed += 1;
                } else if value_removed(&s.ground_truth, &r.output) {
                    t.hits += 1;
                }
            }
            Polarity::Negative => {
                t.n_neg += 1;
                if r.failed {
                    t.failed += 1;
                } else if value_preserved(&s.ground_truth, &r.output) {
                    t.tn += 1;
                } else {
                    t.fp += 1;
                }
            }
        }
    }
    Ok(out)
}

fn ratio(num: usize, den: usize, empty: f64) -> f64 {
    if den == 0 {
        empty
    } else {
        num as f64 / den as f64
    }
}

/// Per-category recall: hits over all positives, failures included.
pub fn score_recall(bench: &[BenchmarkSentence], refined: &[RefinementRecord]) -> Result<BTreeMap<String, f64>, JoinError> {
    Ok(tally(bench, refined)?.into_iter().map(|(k, t)| (k, ratio(t.hits, t.n_pos, 0.0))).collect())
}

/// Per-category precision `TP / (TP + FP)` for categories with negatives.
/// With no interventions at all, precision is 1.
pub fn score_precision(bench: &[BenchmarkSentence], refined: &[RefinementRecord]) -> Result<BTreeMap<String, f64>, JoinError> {
    Ok(tally(bench, refined)?
        .into_iter()
        .filter(|(_, t)| t.n_neg > 0)
        .map(|(k, t)| (k, ratio(t.hits, t.hits + t.fp, 1.0)))
        .collect())
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn evaluate_pii(
    bench: &[BenchmarkSentence],
    refined: &[RefinementRecord],
    weighting: Weighting,
) -> Result<EvalReport, JoinError> {
    let tallies = tally(bench, refined)?;
    let per_category: BTreeMap<String, CategoryScore> = tallies
        .iter()
        .map(|(k, t)| {
            let recall = ratio(t.hits, t.n_pos, 0.0);
            let numeric = t.n_neg > 0;
            let precision = numeric.then(|| ratio(t.hits, t.hits + t.fp, 1.0));
            let score = CategoryScore {
                recall,
                precision,
                f_score: precision.map(|p| f_score(p, recall)),
                negative_preservation: numeric.then(|| ratio(t.tn, t.tn + t.fp, 1.0)),
                n_pos: t.n_pos,
                n_neg: t.n_neg,
                hits: t.hits,
                false_positives: t.fp,
                failed: t.failed,
            };
            (k.clone(), score)
        })
        .collect();
    let numeric: Vec<&Tally> = tallies.values().filter(|t| t.n_neg > 0).collect();
    let (recall, precision, preservation) = match weighting {
        Weighting::Unweighted => (
            mean(per_category.values().map(|c| c.recall)).unwrap_or(0.0),
            mean(per_category.values().filter_map(|c| c.precision)),
            mean(per_category.values().filter_map(|c| c.negative_preservation)),
        ),
        Weighting::Weighted => {
            let sum = |f: fn(&Tally) -> usize, ts: &[&Tally]| ts.iter().map(|t| f(t)).sum::<usize>();
            let all: Vec<&Tally> = tallies.values().collect();
            let tp = sum(|t| t.hits, &numeric);
            let fp = sum(|t| t.fp, &numeric);
            let tn = sum(|t| t.tn, &numeric);
            (
                ratio(sum(|t| t.hits, &all), sum(|t| t.n_pos, &all), 0.0),
                (!numeric.is_empty()).then(|| ratio(tp, tp + fp, 1.0)),
                (!numeric.is_empty()).then(|| ratio(tn, tn + fp, 1.0)),
            )
        }
    };
    Ok(EvalReport {
        aggregate: Aggregate {
            weighting,
            recall,
            precision,
            f_score: precision.map(|p| f_score(p, recall)),
            negative_preservation: preservation,
            n_categories: per_category.len(),
            n_numeric_categories: numeric.len(),
        },
        per_category,
        reference: ReferenceFigures::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{PlaceholderVerdict, TaskKind};
    use proptest::prelude::*;

    fn sentence(id: &str, cat: &str, polarity: Polarity, gt: &str) -> BenchmarkSentence {
        BenchmarkSentence {
            sentence_id: id.into(),
            category_id: cat.into(),
            polarity,
            text: format!("x {gt} y"),
            ground_truth: gt.into(),
            span: (2, 2 + gt.chars().count()),
            mentions_type: false,
        }
    }

    fn record(id: &str, output: &str, failed: bool) -> RefinementRecord {
        RefinementRecord {
            record_id: id.into(),
            input: String::new(),
            output: output.into(),
            task_kind: TaskKind::PiiSentence,
            backend_id: "t".into(),
            prompt_hash: String::new(),
            drift: 0.0,
            placeholder_ok: PlaceholderVerdict::NotApplicable,
            placeholder_reason: None,
            failed,
            error: None,
        }
    }

    #[test]
    fn table_rows() {
        assert!((f_score(0.52, 0.53) - 0.52).abs() <= 0.005);
        assert!((f_score(0.80, 0.99) - 0.88).abs() <= 0.005);
        assert_eq!(f_score(1.0, 1.0), 1.0);
        assert_eq!(f_score(0.0, 0.0), 0.0);
    }

    #[test]
    fn removal_predicate() {
        assert!(!value_removed("6687-7593-7744", "card 6687-7593-7744"));
        assert!(!value_removed("6687-7593-7744", "card 668775937744"));
        assert!(!value_removed("6687-7593-7744", "card 6687 7593 7744"));
        assert!(value_removed("6687-7593-7744", "card 1234-5678-9101"));
    }

    #[test]
    fn counting() {
        let bench = vec![
            sentence("p1", "a", Polarity::Positive, "111111111"),
            sentence("n1", "a", Polarity::Negative, "111111111"),
            sentence("p2", "a", Polarity::Positive, "222222222"),
            sentence("n2", "a", Polarity::Negative, "222222222"),
            sentence("p3", "tok", Polarity::Positive, "AKIAXYZ"),
        ];
        let refined = vec![
            record("p1", "x 123456789 y", false),
            record("n1", "x 123456789 y", false),
            record("p2", "x 222222222 y", true),
            record("n2", "x 222222222 y", false),
            record("p3", "x abcdefg y", false),
        ];
        let report = evaluate_pii(&bench, &refined, Weighting::Unweighted).unwrap();
        let a = &report.per_category["a"];
        assert_eq!((a.hits, a.false_positives, a.failed), (1, 1, 1));
        assert_eq!(a.recall, 0.5);
        assert_eq!(a.precision, Some(0.5));
        assert_eq!(a.negative_preservation, Some(0.5));
        assert_eq!(report.per_category["tok"].precision, None);
        assert_eq!(report.aggregate.recall, 0.75);
        assert_eq!(report.aggregate.precision, Some(0.5));
        assert_eq!(report.aggregate.f_score, Some(f_score(0.5, 0.75)));
        let weighted = evaluate_pii(&bench, &refined, Weighting::Weighted).unwrap();
        assert!((weighted.aggregate.recall - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn join_errors() {
        let bench = vec![sentence("p1", "a", Polarity::Positive, "1")];
        assert_eq!(score_recall(&bench, &[]), Err(JoinError::MissingRecord("p1".into())));
        let extra = vec![record("p1", "", false), record("zz", "", false)];
        assert_eq!(score_recall(&bench, &extra), Err(JoinError::UnknownRecord("zz".into())));
    }

    #[test]
    fn identity_precision_is_one() {
        let bench = vec![sentence("p", "a", Polarity::Positive, "123456789"), sentence("n", "a", Polarity::Negative, "123456789")];
        let refined = vec![record("p", "x 123456789 y", false), record("n", "x 123456789 y", false)];
        assert_eq!(score_precision(&bench, &refined).unwrap()["a"], 1.0);
        assert_eq!(score_recall(&bench, &refined).unwrap()["a"], 0.0);
    }

    proptest! {
        #[test]
        fn f_score_bounds(p in 0.0f64..=1.0, r in 0.0f64..=1.0) {
            let f = f_score(p, r);
            prop_assert!(f >= 0.0);
            prop_assert!(f <= (p + r) / 2.0 + 1e-12);
            prop_assert!((f - f_score(r, p)).abs() < 1e-12);
            if p + r > 0.0 {
                let harmonic = 1.0 / ((1.0 / p.max(1e-300) + 1.0 / r.max(1e-300)) / 2.0);
                prop_assert!((f - harmonic).abs() < 1e-9 || p == 0.0 || r == 0.0);
            }
        }
    }
}
