//! Detox response parsing, quizzes built from extracted facts, and the
//! public/private company question set.

pub mod companies;
pub mod detox;
pub mod names;
pub mod quiz;

pub use companies::{
    anonymize_company, anonymize_company_json, derive_company_qa, derive_corpus_qa, replacement_name, synth_companies,
    word_overlap, CompanyEntry, CompanyError, LookupResponder,
};
pub use detox::{
    clean_message, detox_with_lexicon, extract_messages, parse_detox_output, synth_toxic_pairs, DetoxError, DetoxOutput,
    ToxicRecord,
};
pub use quiz::{
    answers_match, build_quiz, grade_quiz, normalize_answer, score_public_private, GradeReport, PublicPrivate, QaTag,
    QuizError, QuizItem, QuizResponse, MAX_ANSWER_TOKENS,
};
