use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{CodeError, LineRewrite};
use crate::evaluation::{confusion, ConfusionMatrix, Level};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Pii,
    Clean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineAnnotation {
    pub file_path: String,
    pub line_number: usize,
    pub label: Label,
}

/// Reads `file_path,line_number,label` rows with a header.
pub fn read_annotations<R: Read>(reader: R) -> Result<Vec<LineAnnotation>, CodeError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for row in csv::Reader::from_reader(reader).deserialize::<LineAnnotation>() {
        let a = row.map_err(|e| CodeError::Annotation(e.to_string()))?;
        if !seen.insert((a.file_path.clone(), a.line_number)) {
            return Err(CodeError::DuplicateAnnotation(a.file_path, a.line_number));
        }
        out.push(a);
    }
    Ok(out)
}

pub fn write_annotations<W: std::io::Write>(writer: W, annotations: &[LineAnnotation]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for a in annotations {
        w.serialize(a)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agreement {
    pub line: ConfusionMatrix,
    pub document: ConfusionMatrix,
}

/// Scores per-line predictions against annotations. Both sides must cover
/// exactly the same lines. A document is positive when any line is.
pub fn score_predictions<'a>(
    predictions: impl IntoIterator<Item = (&'a str, usize, bool)>,
    annotations: &[LineAnnotation],
) -> Result<Agreement, CodeError> {
    let mut labels: BTreeMap<(&str, usize), bool> = BTreeMap::new();
    for a in annotations {
        if labels.insert((a.file_path.as_str(), a.line_number), a.label == Label::Pii).is_some() {
            return Err(CodeError::DuplicateAnnotation(a.file_path.clone(), a.line_number));
        }
    }
    let mut preds: BTreeMap<(&str, usize), bool> = BTreeMap::new();
    for (file, line, p) in predictions {
        if !labels.contains_key(&(file, line)) {
            return Err(CodeError::Unannotated(file.to_string(), line));
        }
        preds.insert((file, line), p);
    }
    if let Some((file, line)) = labels.keys().find(|k| !preds.contains_key(*k)) {
        return Err(CodeError::MissingRewrite(file.to_string(), *line));
    }
    let (line_labels, line_preds): (Vec<bool>, Vec<bool>) = labels.iter().map(|(k, &l)| (l, preds[k])).unzip();
    let (doc_labels, doc_preds) = crate::evaluation::fold_documents(labels.iter().map(|(k, &l)| (k.0, l, preds[k])));
    Ok(Agreement {
        line: confusion(&line_labels, &line_preds, Level::Line).expect("aligned"),
        document: confusion(&doc_labels, &doc_preds, Level::Document).expect("aligned"),
    })
}

/// Agreement of refinement with annotations: a line is predicted PII when
/// its rewrite changed it.
pub fn score_agreement(rewrites: &[LineRewrite], annotations: &[LineAnnotation]) -> Result<Agreement, CodeError> {
    score_predictions(rewrites.iter().map(|r| (r.line.file_path.as_str(), r.line.line_number, r.changed)), annotations)
}
