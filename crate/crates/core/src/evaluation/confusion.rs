use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Line,
    Document,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub level: Level,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{labels} labels but {predictions} predictions")]
pub struct LengthMismatch {
    pub labels: usize,
    pub predictions: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Share of labelled positives predicted positive.
    pub fn positive_agreement(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    /// Share of labelled negatives predicted negative.
    pub fn negative_agreement(&self) -> f64 {
        if self.tn + self.fp == 0 {
            1.0
        } else {
            self.tn as f64 / (self.tn + self.fp) as f64
        }
    }
}

pub fn confusion(labels: &[bool], predictions: &[bool], level: Level) -> Result<ConfusionMatrix, LengthMismatch> {
    if labels.len() != predictions.len() {
        return Err(LengthMismatch { labels: labels.len(), predictions: predictions.len() });
    }
    let mut m = ConfusionMatrix { level, tp: 0, fp: 0, fn_: 0, tn: 0 };
    for (&l, &p) in labels.iter().zip(predictions) {
        match (l, p) {
            (true, true) => m.tp += 1,
            (false, true) => m.fp += 1,
            (true, false) => m.fn_ += 1,
            (false, false) => m.tn += 1,
        }
    }
    Ok(m)
}

/// Folds per-line `(document, label, prediction)` triples into per-document
/// pairs: a document is positive when any of its lines is.
pub fn fold_documents<'a>(lines: impl IntoIterator<Item = (&'a str, bool, bool)>) -> (Vec<bool>, Vec<bool>) {
    let mut docs: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
    for (doc, label, pred) in lines {
        let e = docs.entry(doc).or_default();
        e.0 |= label;
        e.1 |= pred;
    }
    docs.into_values().unzip()
}
