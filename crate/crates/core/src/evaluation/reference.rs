use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfRow {
    pub recall: f64,
    pub precision: f64,
    pub f_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow<T> {
    pub raw: T,
    pub refined: T,
    pub synthetic: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompaniesRow {
    pub m: f64,
    pub m_dirs: f64,
    pub m_refined: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuizRow {
    pub no_finetune: f64,
    pub refined: f64,
}

/// Published full-scale figures, shown next to measured values. These are
/// not reproduced here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFigures {
    pub pii_rule_based: PrfRow,
    pub pii_generative: PrfRow,
    pub companies_public: CompaniesRow,
    pub companies_private: CompaniesRow,
    pub toxicity_mean: CorpusRow<f64>,
    pub embedding_distance: CorpusRow<f64>,
    pub rouge2: CorpusRow<f64>,
    pub quiz_accuracy: QuizRow,
}

impl Default for ReferenceFigures {
    fn default() -> Self {
        ReferenceFigures {
            pii_rule_based: PrfRow { recall: 0.53, precision: 0.52, f_score: 0.52 },
            pii_generative: PrfRow { recall: 0.99, precision: 0.80, f_score: 0.88 },
            companies_public: CompaniesRow { m: 0.32, m_dirs: 0.00, m_refined: 0.25 },
            companies_private: CompaniesRow { m: 0.26, m_dirs: 0.00, m_refined: 0.00 },
            toxicity_mean: CorpusRow { raw: 0.19, refined: 0.13, synthetic: 0.14 },
            embedding_distance: CorpusRow { raw: 1.0, refined: 1.1, synthetic: 0.99 },
            rouge2: CorpusRow { raw: 0.0037, refined: 0.0038, synthetic: 0.012 },
            quiz_accuracy: QuizRow { no_finetune: 0.88, refined: 0.92 },
        }
    }
}
