use std::hash::Hasher;
use std::io::Write;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rouge::{bigrams, rouge2_f_counts, tokenize};
use crate::rng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiversityError {
    #[error("sample size {sample} exceeds corpus size {corpus}")]
    SampleTooLarge { sample: usize, corpus: usize },
    #[error("need at least two documents, got {0}")]
    TooFew(usize),
}

#[derive(Debug, Error)]
#[error("embedding failed: {0}")]
pub struct EmbedError(pub String);

pub trait Embedder: Send + Sync {
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, EmbedError>;
}

/// Signed feature hashing of lowercase unigrams and bigrams.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    pub dim: usize,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder { dim: 256 }
    }
}

impl HashingEmbedder {
    fn bucket(&self, feature: &str) -> (usize, f32) {
        let mut h = fnv::FnvHasher::default();
        h.write(feature.as_bytes());
        let v = h.finish();
        ((v % self.dim as u64) as usize, if v >> 63 == 0 { 1.0 } else { -1.0 })
    }

    pub fn embed_one(&self, text: &str) -> Vec<f32> {
        let mut out = vec![0.0f32; self.dim.max(1)];
        let tokens = tokenize(text);
        for t in &tokens {
            let (i, s) = self.bucket(t);
            out[i] += s;
        }
        for w in tokens.windows(2) {
            let (i, s) = self.bucket(&format!("{} {}", w[0], w[1]));
            out[i] += s;
        }
        out
    }
}

impl Embedder for HashingEmbedder {
    fn embed(&self, texts: &[&str]) -> Result<Vec<Vec<f32>>, EmbedError> {
        if self.dim == 0 {
            return Err(EmbedError("zero dimension".into()));
        }
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub mean_pairwise_rouge2_f: f64,
    pub mean_pairwise_cosine_distance: Option<f64>,
    pub mean_pairwise_l2_distance: Option<f64>,
    pub sample_size: usize,
    pub n_pairs: u64,
    pub seed: u64,
    pub embedder_error: Option<String>,
    pub note: String,
}

const METRIC_NOTE: &str =
    "embedding distance is reported as both cosine distance and L2 distance of unit vectors; reference tables label the column L2 while describing cosine distance";

/// Sampled corpus indices, in sampling order.
pub fn sample_indices(corpus_len: usize, sample_size: usize, seed: u64) -> Result<Vec<usize>, DiversityError> {
    if sample_size > corpus_len {
        return Err(DiversityError::SampleTooLarge { sample: sample_size, corpus: corpus_len });
    }
    let mut r = rng::stream(seed, &["diversity-sample"]);
    Ok(index::sample(&mut r, corpus_len, sample_size).into_vec())
}

/// Mean of `f(i, j)` over unordered pairs `i < j`, one row per parallel task
/// and a fixed-order reduction of the row sums.
fn mean_over_pairs(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> (f64, u64) {
    let rows: Vec<f64> = (0..n).into_par_iter().map(|i| (i + 1..n).map(|j| f(i, j)).sum()).collect();
    let pairs = (n as u64) * (n as u64).saturating_sub(1) / 2;
    let total: f64 = rows.iter().sum();
    (if pairs == 0 { 0.0 } else { total / pairs as f64 }, pairs)
}

fn normalize(v: &[f32]) -> Vec<f64> {
    let norm = v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    if norm == 0.0 {
        vec![0.0; v.len()]
    } else {
        v.iter().map(|x| *x as f64 / norm).collect()
    }
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    1.0 - a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn mean_pairwise_diversity(
    corpus: &[String],
    sample_size: usize,
    seed: u64,
    embedder: Option<&dyn Embedder>,
) -> Result<DiversityReport, DiversityError> {
    if sample_size < 2 {
        return Err(DiversityError::TooFew(sample_size));
    }
    let picked = sample_indices(corpus.len(), sample_size, seed)?;
    let docs: Vec<&str> = picked.iter().map(|&i| corpus[i].as_str()).collect();
    let grams: Vec<_> = docs.par_iter().map(|d| bigrams(d)).collect();
    let (rouge, n_pairs) = mean_over_pairs(docs.len(), |i, j| rouge2_f_counts(&grams[i], &grams[j]));

    let mut report = DiversityReport {
        mean_pairwise_rouge2_f: rouge,
        mean_pairwise_cosine_distance: None,
        mean_pairwise_l2_distance: None,
        sample_size,
        n_pairs,
        seed,
        embedder_error: None,
        note: METRIC_NOTE.to_string(),
    };
    if let Some(embedder) = embedder {
        match embedder.embed(&docs) {
            Ok(vectors) if vectors.len() == docs.len() => {
                let unit: Vec<Vec<f64>> = vectors.iter().map(|v| normalize(v)).collect();
                report.mean_pairwise_cosine_distance = Some(mean_over_pairs(unit.len(), |i, j| cosine_distance(&unit[i], &unit[j])).0);
                report.mean_pairwise_l2_distance = Some(mean_over_pairs(unit.len(), |i, j| l2_distance(&unit[i], &unit[j])).0);
            }
            Ok(vectors) => {
                report.embedder_error = Some(format!("embedder returned {} vectors for {} documents", vectors.len(), docs.len()));
            }
            Err(e) => {
                log::warn!("{e}");
                report.embedder_error = Some(e.to_string());
            }
        }
    }
    Ok(report)
}

/// Writes `index,dim_0,...` rows for external projection tools.
pub fn write_embeddings_csv<W: Write>(writer: W, ids: &[String], vectors: &[Vec<f32>]) -> csv::Result<()> {
    let dim = vectors.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend((0..dim).map(|d| format!("dim_{d}")));
    w.write_record(&header)?;
    for (id, v) in ids.iter().zip(vectors) {
        let mut row = vec![id.clone()];
        row.extend(v.iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
