//! Scoring: PII recall and precision, confusion matrices, ROUGE-2 and
//! embedding diversity, and toxicity.

pub mod confusion;
pub mod diversity;
pub mod pii;
pub mod reference;
pub mod rouge;
pub mod toxicity;

pub use confusion::{confusion, fold_documents, ConfusionMatrix, LengthMismatch, Level};
pub use diversity::{
    cosine_distance, l2_distance, mean_pairwise_diversity, sample_indices, write_embeddings_csv, DiversityError,
    DiversityReport, EmbedError, Embedder, HashingEmbedder,
};
pub use pii::{
    evaluate_pii, f_score, score_precision, score_recall, value_preserved, value_removed, Aggregate, CategoryScore,
    EvalReport, JoinError, Weighting,
};
pub use reference::{CompaniesRow, CorpusRow, ReferenceFigures, PrfRow, QuizRow};
pub use rouge::{bigrams, rouge2_f, tokenize};
pub use toxicity::{
    score_corpus, toxicity_score, Lexicon, LexiconScorer, PerspectiveScorer, ToxicityReport, ToxicityScorer,
    PERSPECTIVE_CATEGORIES, PERSPECTIVE_KEY_ENV, TOXICITY,
};
