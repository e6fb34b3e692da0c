//! Synthetic company profiles, question derivation, and the anonymiser that
//! swaps every incoming-CEO detail for unrelated values.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::OnceLock;
use thiserror::Error;

use super::names;
use super::quiz::{QaTag, QuizItem};
use crate::rng;

#[derive(Debug, Error)]
pub enum CompanyError {
    #[error("invalid company JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field {0} is empty")]
    EmptyField(&'static str),
    #[error("next_ceo_date {0:?} is not MM-YYYY")]
    BadDate(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompanyEntry {
    pub company_name: String,
    pub company_blurb: String,
    pub ceo_full_name: String,
    pub ceo_bio: String,
    pub next_ceo_full_name: String,
    pub next_ceo_bio: String,
    pub next_ceo_date: String,
}

fn date_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(0[1-9]|1[0-2])-[0-9]{4}$").expect("date regex"))
}

impl CompanyEntry {
    pub fn validate(&self) -> Result<(), CompanyError> {
        let fields = [
            ("company_name", &self.company_name),
            ("company_blurb", &self.company_blurb),
            ("ceo_full_name", &self.ceo_full_name),
            ("ceo_bio", &self.ceo_bio),
            ("next_ceo_full_name", &self.next_ceo_full_name),
            ("next_ceo_bio", &self.next_ceo_bio),
            ("next_ceo_date", &self.next_ceo_date),
        ];
        for (name, value) in fields {
            if value.trim().is_empty() {
                return Err(CompanyError::EmptyField(name));
            }
        }
        if !date_re().is_match(&self.next_ceo_date) {
            return Err(CompanyError::BadDate(self.next_ceo_date.clone()));
        }
        Ok(())
    }
}

/// Three questions per company; only the incoming-CEO one is private.
pub fn derive_company_qa(entry: &CompanyEntry, source_id: &str) -> Vec<QuizItem> {
    let item = |suffix: &str, question: String, answer: &str, tag: QaTag| QuizItem {
        item_id: format!("{source_id}-{suffix}"),
        question,
        answer_key: answer.to_string(),
        tag: tag.as_str().to_string(),
        source_record_id: Some(source_id.to_string()),
    };
    vec![
        item("ceo", format!("Who is the CEO of {}?", entry.company_name), &entry.ceo_full_name, QaTag::Public),
        item("incoming", format!("Who is the incoming CEO of {}?", entry.company_name), &entry.next_ceo_full_name, QaTag::Private),
        item("company", format!("Which company does {} lead?", entry.ceo_full_name), &entry.company_name, QaTag::Public),
    ]
}

/// Derives questions for a corpus; source ids are `company-NNNNN`.
pub fn derive_corpus_qa(entries: &[CompanyEntry]) -> Vec<QuizItem> {
    entries.iter().enumerate().flat_map(|(i, e)| derive_company_qa(e, &format!("company-{i:05}"))).collect()
}

/// Answers questions by exact lookup in the QA derived from a corpus, the
/// stand-in for a model that memorised that corpus.
#[derive(Debug, Clone, Default)]
pub struct LookupResponder {
    answers: BTreeMap<String, String>,
}

impl LookupResponder {
    pub fn from_corpus(entries: &[CompanyEntry]) -> Self {
        let mut answers = BTreeMap::new();
        for item in derive_corpus_qa(entries) {
            answers.entry(item.question).or_insert(item.answer_key);
        }
        LookupResponder { answers }
    }

    pub fn answer(&self, question: &str) -> Option<&str> {
        self.answers.get(question).map(String::as_str)
    }
}

const BIO_TEMPLATES: &[&str] = &[
    "{name} spent a decade running operations at a regional {field} firm before joining the board.",
    "{name} founded two startups and previously led product strategy for a large {field} group.",
    "{name} trained as an engineer and rose through the ranks in {field}.",
    "{name} is a former consultant who advised {field} companies on international expansion.",
];

const REPLACEMENT_BIOS: &[&str] = &[
    "{name} chaired philanthropic trusts supporting maritime archaeology.",
    "{name} oversaw vineyard cooperatives across southern Portugal.",
    "{name} directed orchestral touring programmes throughout Scandinavia.",
    "{name} managed alpine railway restorations within Switzerland.",
];

fn fill(template: &str, name: &str, field: &str) -> String {
    template.replace("{name}", name).replace("{field}", field)
}

fn unique_name<R: Rng>(r: &mut R, first: &[&str], last: &[&str], used: &mut HashSet<String>) -> String {
    for _ in 0..64 {
        let name = format!("{} {}", first.choose(r).expect("bank"), last.choose(r).expect("bank"));
        if used.insert(name.clone()) {
            return name;
        }
    }
    loop {
        let initial = char::from(b'A' + r.gen_range(0..26u8));
        let name = format!("{} {initial}. {}", first.choose(r).expect("bank"), last.choose(r).expect("bank"));
        if used.insert(name.clone()) {
            return name;
        }
    }
}

/// `n` companies with distinct names and distinct people.
pub fn synth_companies(n: usize, seed: u64) -> Vec<CompanyEntry> {
    let mut r = rng::stream(seed, &["companies"]);
    let mut used_people = HashSet::new();
    let mut used_companies = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let head = names::COMPANY_HEAD.choose(&mut r).expect("bank");
        let (tail, activity) = names::INDUSTRY.choose(&mut r).expect("bank");
        let mut company_name = format!("{head} {tail}");
        if !used_companies.insert(company_name.clone()) {
            company_name = format!("{head} {tail} {}", used_companies.len());
            used_companies.insert(company_name.clone());
        }
        let field = tail.to_lowercase();
        let ceo = unique_name(&mut r, names::FIRST, names::LAST, &mut used_people);
        let next = unique_name(&mut r, names::FIRST, names::LAST, &mut used_people);
        let ceo_bio = fill(BIO_TEMPLATES.choose(&mut r).expect("bank"), &ceo, &field);
        let next_bio = fill(BIO_TEMPLATES.choose(&mut r).expect("bank"), &next, &field);
        let month = r.gen_range(1..=12);
        let year = r.gen_range(2025..=2029);
        out.push(CompanyEntry {
            company_blurb: format!("{company_name} {activity}."),
            company_name,
            ceo_full_name: ceo,
            ceo_bio,
            next_ceo_full_name: next,
            next_ceo_bio: next_bio,
            next_ceo_date: format!("{month:02}-{year}"),
        });
    }
    out
}

fn digest_index(text: &str, salt: &str, len: usize) -> usize {
    let h = Sha256::digest(format!("{salt}\u{0}{text}").as_bytes());
    (u64::from_le_bytes(h[..8].try_into().expect("8 bytes")) % len as u64) as usize
}

fn words(s: &str) -> HashSet<String> {
    s.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase).collect()
}

pub fn word_overlap(a: &str, b: &str) -> usize {
    words(a).intersection(&words(b)).count()
}

/// Replacement person chosen from the disjoint bank by hashing the original.
pub fn replacement_name(original: &str) -> String {
    let first = names::REPLACEMENT_FIRST[digest_index(original, "first", names::REPLACEMENT_FIRST.len())];
    let last = names::REPLACEMENT_LAST[digest_index(original, "last", names::REPLACEMENT_LAST.len())];
    format!("{first} {last}")
}

/// Swaps the incoming CEO's name, bio and date for unrelated values, and
/// rewrites any mention of the old name elsewhere.
pub fn anonymize_company(entry: &CompanyEntry) -> CompanyEntry {
    let old = entry.next_ceo_full_name.as_str();
    let new_name = replacement_name(old);
    let bio = fill(REPLACEMENT_BIOS[digest_index(old, "bio", REPLACEMENT_BIOS.len())], &new_name, "");
    let month: u32 = entry.next_ceo_date.get(..2).and_then(|m| m.parse().ok()).unwrap_or(1);
    let year: u32 = entry.next_ceo_date.get(3..).and_then(|y| y.parse().ok()).unwrap_or(2025);
    let date = format!("{:02}-{}", (month + 5) % 12 + 1, year + 3);
    let swap = |s: &str| s.replace(old, &new_name);
    CompanyEntry {
        company_name: swap(&entry.company_name),
        company_blurb: swap(&entry.company_blurb),
        ceo_full_name: entry.ceo_full_name.clone(),
        ceo_bio: swap(&entry.ceo_bio),
        next_ceo_full_name: new_name,
        next_ceo_bio: bio,
        next_ceo_date: date,
    }
}

/// JSON in, JSON out wrapper around [`anonymize_company`].
pub fn anonymize_company_json(json: &str) -> Result<String, CompanyError> {
    let entry: CompanyEntry = serde_json::from_str(json)?;
    entry.validate()?;
    Ok(serde_json::to_string(&anonymize_company(&entry))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zenith() -> CompanyEntry {
        CompanyEntry {
            company_name: "Zenith Bionics".into(),
            company_blurb: "Zenith Bionics designs prosthetic limbs.".into(),
            ceo_full_name: "Evelyn Hayes".into(),
            ceo_bio: "Evelyn Hayes is a biomedical engineer.".into(),
            next_ceo_full_name: "Isabella Torres".into(),
            next_ceo_bio: "Isabella Torres led research at a robotics firm.".into(),
            next_ceo_date: "03-2026".into(),
        }
    }

    #[test]
    fn qa_items() {
        let items = derive_company_qa(&zenith(), "z");
        assert_eq!(items.len(), 3);
        let private: Vec<_> = items.iter().filter(|i| i.tag == "private").collect();
        assert_eq!(private.len(), 1);
        assert_eq!(private[0].answer_key, "Isabella Torres");
        assert_eq!(private[0].question, "Who is the incoming CEO of Zenith Bionics?");
        assert!(items.iter().filter(|i| i.tag == "public").all(|i| !i.answer_key.contains("Torres")));

        let mut verdant = zenith();
        verdant.company_name = "Verdant Fields Organics".into();
        verdant.ceo_full_name = "Dr. Amelia Sanchez".into();
        let items = derive_company_qa(&verdant, "v");
        assert_eq!(items[0].question, "Who is the CEO of Verdant Fields Organics?");
        assert_eq!(items[0].answer_key, "Dr. Amelia Sanchez");
    }

    #[test]
    fn synthetic_entries_are_valid_and_unique() {
        let entries = synth_companies(300, 4);
        assert_eq!(entries.len(), 300);
        let ceos: HashSet<_> = entries.iter().map(|e| e.ceo_full_name.clone()).collect();
        assert_eq!(ceos.len(), 300);
        let companies: HashSet<_> = entries.iter().map(|e| e.company_name.clone()).collect();
        assert_eq!(companies.len(), 300);
        for e in &entries {
            e.validate().unwrap();
            assert_ne!(e.ceo_full_name, e.next_ceo_full_name);
        }
        assert_eq!(entries, synth_companies(300, 4));
        assert_eq!(derive_corpus_qa(&entries).len(), 900);
    }

    #[test]
    fn anonymiser_has_no_word_overlap() {
        for e in synth_companies(100, 1) {
            let a = anonymize_company(&e);
            assert_eq!(word_overlap(&a.next_ceo_full_name, &e.next_ceo_full_name), 0);
            assert_eq!(word_overlap(&a.next_ceo_bio, &e.next_ceo_full_name), 0);
            assert_ne!(a.next_ceo_date, e.next_ceo_date);
            assert_eq!(a.ceo_full_name, e.ceo_full_name);
            assert_eq!(a.company_name, e.company_name);
            a.validate().unwrap();
        }
    }

    #[test]
    fn json_round_trip() {
        let json = serde_json::to_string(&zenith()).unwrap();
        let out: CompanyEntry = serde_json::from_str(&anonymize_company_json(&json).unwrap()).unwrap();
        assert_ne!(out.next_ceo_full_name, "Isabella Torres");
        assert!(anonymize_company_json("{}").is_err());
        let mut bad = zenith();
        bad.next_ceo_date = "13-2026".into();
        assert!(matches!(bad.validate(), Err(CompanyError::BadDate(_))));
    }

    #[test]
    fn lookup_responder() {
        let entries = vec![zenith()];
        let r = LookupResponder::from_corpus(&entries);
        assert_eq!(r.answer("Who is the CEO of Zenith Bionics?"), Some("Evelyn Hayes"));
        assert_eq!(r.answer("Who is the CEO of Nobody?"), None);
    }
}
