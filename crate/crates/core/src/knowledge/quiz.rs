//! Quiz items, answer normalisation and grading.

use std::collections::HashMap;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::detox::DetoxOutput;
use crate::rng;

/// Longest accepted answer key, in whitespace tokens.
pub const MAX_ANSWER_TOKENS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QaTag {
    Public,
    Private,
    Fact,
}

impl QaTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            QaTag::Public => "public",
            QaTag::Private => "private",
            QaTag::Fact => "fact",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizItem {
    pub item_id: String,
    pub question: String,
    pub answer_key: String,
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_record_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizResponse {
    pub item_id: String,
    pub response: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuizError {
    #[error("asked for {wanted} items but only {available} qualifying pairs exist")]
    Insufficient { wanted: usize, available: usize },
}

/// Samples `k` QA pairs uniformly without replacement from detox outputs.
/// Pairs whose answer exceeds [`MAX_ANSWER_TOKENS`] are not eligible.
/// Items keep corpus order.
pub fn build_quiz(outputs: &[(String, DetoxOutput)], k: usize, seed: u64) -> Result<Vec<QuizItem>, QuizError> {
    let pool: Vec<(&str, &str, &str)> = outputs
        .iter()
        .flat_map(|(id, out)| out.qa_pairs.iter().map(move |(q, a)| (id.as_str(), q.as_str(), a.as_str())))
        .filter(|(_, _, a)| a.split_whitespace().count() <= MAX_ANSWER_TOKENS)
        .collect();
    if k > pool.len() {
        return Err(QuizError::Insufficient { wanted: k, available: pool.len() });
    }
    let mut picked = index::sample(&mut rng::stream(seed, &["quiz"]), pool.len(), k).into_vec();
    picked.sort_unstable();
    Ok(picked
        .into_iter()
        .enumerate()
        .map(|(n, i)| {
            let (id, q, a) = pool[i];
            QuizItem {
                item_id: format!("quiz-{n:05}"),
                question: q.to_string(),
                answer_key: a.to_string(),
                tag: QaTag::Fact.as_str().to_string(),
                source_record_id: Some(id.to_string()),
            }
        })
        .collect())
}

/// Lowercase, drop punctuation, collapse whitespace, strip one leading
/// article, and map `y`/`n` to `yes`/`no`.
pub fn normalize_answer(s: &str) -> String {
    let lower: String = s.to_lowercase().chars().filter(|c| c.is_alphanumeric() || c.is_whitespace()).collect();
    let mut words: Vec<&str> = lower.split_whitespace().collect();
    if words.len() > 1 && matches!(words[0], "a" | "an" | "the") {
        words.remove(0);
    }
    match words.as_slice() {
        ["y"] => "yes".into(),
        ["n"] => "no".into(),
        _ => words.join(" "),
    }
}

pub fn answers_match(key: &str, response: &str) -> bool {
    normalize_answer(key) == normalize_answer(response)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradeReport {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

/// Missing responses count as wrong; an empty quiz scores 0.
pub fn grade_quiz(items: &[QuizItem], responses: &[QuizResponse]) -> GradeReport {
    let by_id: HashMap<&str, &str> = responses.iter().map(|r| (r.item_id.as_str(), r.response.as_str())).collect();
    let correct = items
        .iter()
        .filter(|item| by_id.get(item.item_id.as_str()).is_some_and(|r| answers_match(&item.answer_key, r)))
        .count();
    let total = items.len();
    GradeReport { correct, total, accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 } }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublicPrivate {
    pub public_accuracy: f64,
    pub private_accuracy: f64,
    pub n_public: usize,
    pub n_private: usize,
}

pub fn score_public_private(items: &[QuizItem], responses: &[QuizResponse]) -> PublicPrivate {
    let subset = |tag: QaTag| -> Vec<QuizItem> { items.iter().filter(|i| i.tag == tag.as_str()).cloned().collect() };
    let public = grade_quiz(&subset(QaTag::Public), responses);
    let private = grade_quiz(&subset(QaTag::Private), responses);
    PublicPrivate {
        public_accuracy: public.accuracy,
        private_accuracy: private.accuracy,
        n_public: public.total,
        n_private: private.total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn item(id: &str, key: &str, tag: QaTag) -> QuizItem {
        QuizItem { item_id: id.into(), question: "q".into(), answer_key: key.into(), tag: tag.as_str().into(), source_record_id: None }
    }

    fn resp(id: &str, r: &str) -> QuizResponse {
        QuizResponse { item_id: id.into(), response: r.into() }
    }

    #[test]
    fn normalisation_cases() {
        assert!(answers_match("Pierce Brosnan", "pierce brosnan"));
        assert!(!answers_match("Yes", "No"));
        assert!(answers_match("Denny's", "dennys"));
        assert!(answers_match("Yes", "y"));
        assert!(answers_match("the Eiffel Tower", "Eiffel   tower."));
        assert!(answers_match("A", "a"));
    }

    #[test]
    fn grading() {
        let items = vec![item("1", "Yes", QaTag::Public), item("2", "Isabella Torres", QaTag::Private)];
        let perfect = vec![resp("1", "Yes"), resp("2", "Isabella Torres")];
        assert_eq!(grade_quiz(&items, &perfect).accuracy, 1.0);
        assert_eq!(grade_quiz(&items, &[]).accuracy, 0.0);
        assert_eq!(grade_quiz(&items, &perfect[..1]).accuracy, 0.5);
        let pp = score_public_private(&items, &perfect);
        assert_eq!((pp.public_accuracy, pp.private_accuracy), (1.0, 1.0));
        let pp = score_public_private(&items, &[resp("1", "yes"), resp("2", "Beatrix Loxley")]);
        assert_eq!((pp.public_accuracy, pp.private_accuracy), (1.0, 0.0));
    }

    fn outputs(n: usize) -> Vec<(String, DetoxOutput)> {
        (0..n)
            .map(|i| {
                let out = DetoxOutput {
                    facts: vec![format!("fact {i}")],
                    qa_pairs: vec![(format!("Question {i}?"), format!("answer {i}"))],
                    cleaned_messages: vec!["a".into(), "b".into()],
                };
                (format!("r{i}"), out)
            })
            .collect()
    }

    #[test]
    fn quiz_building() {
        let outs = outputs(60);
        let quiz = build_quiz(&outs, 50, 3).unwrap();
        assert_eq!(quiz.len(), 50);
        assert_eq!(quiz, build_quiz(&outs, 50, 3).unwrap());
        let mut qs: Vec<_> = quiz.iter().map(|q| q.question.clone()).collect();
        qs.dedup();
        assert_eq!(qs.len(), 50);
        assert!(build_quiz(&outs, 0, 3).unwrap().is_empty());
        assert_eq!(build_quiz(&outs, 61, 3), Err(QuizError::Insufficient { wanted: 61, available: 60 }));
    }

    #[test]
    fn long_answers_are_not_eligible() {
        let mut outs = outputs(1);
        outs[0].1.qa_pairs.push(("Long?".into(), "one two three four five six seven eight nine".into()));
        assert_eq!(build_quiz(&outs, 2, 0), Err(QuizError::Insufficient { wanted: 2, available: 1 }));
    }

    proptest! {
        #[test]
        fn grading_ignores_case_punctuation_and_articles(key in "[A-Za-z]{2,8}( [A-Za-z]{2,8}){0,3}", article in prop::sample::select(vec!["", "the ", "a ", "An "]), punct in "[.,!?'\"]{0,3}") {
            let response = format!("{article}{}{punct}", key.to_uppercase());
            let first = key.split(' ').next().unwrap_or("").to_lowercase();
            prop_assume!(!matches!(first.as_str(), "a" | "an" | "the" | "y" | "n"));
            prop_assert!(answers_match(&key, &response));
        }
    }
}
