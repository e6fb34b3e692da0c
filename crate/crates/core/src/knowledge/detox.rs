//! The structured detox response: true facts, question/answer pairs, and
//! cleaned messages wrapped in `<|SOM|>` / `<|EOM|>`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EOM, SOM};
use crate::evaluation::Lexicon;
use crate::rng;

pub const FACTS_HEADER: &str = "# True facts";
pub const QA_HEADER: &str = "# Question and answer pairs";
pub const CLEANED_HEADER: &str = "# Cleaned text";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DetoxError {
    #[error("missing section header {0:?}")]
    MissingSection(&'static str),
    #[error("expected {expected} messages, found {found} marker pairs")]
    MarkerMismatch { expected: usize, found: usize },
    #[error("unbalanced message markers")]
    UnbalancedMarkers,
    #[error("question on line {0} has no answer")]
    DanglingQuestion(usize),
    #[error("answer on line {0} has no question")]
    OrphanAnswer(usize),
    #[error("empty question or answer on line {0}")]
    EmptyPair(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetoxOutput {
    pub facts: Vec<String>,
    pub qa_pairs: Vec<(String, String)>,
    pub cleaned_messages: Vec<String>,
}

impl DetoxOutput {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(FACTS_HEADER);
        out.push('\n');
        for f in &self.facts {
            out.push_str(f);
            out.push('\n');
        }
        out.push('\n');
        out.push_str(QA_HEADER);
        out.push('\n');
        let pairs: Vec<String> = self.qa_pairs.iter().map(|(q, a)| format!("Q: {q}\nA: {a}\n")).collect();
        out.push_str(&pairs.join("\n"));
        out.push('\n');
        out.push_str(CLEANED_HEADER);
        out.push('\n');
        for m in &self.cleaned_messages {
            out.push_str(&format!("{SOM}{m}{EOM}\n"));
        }
        out
    }

    /// Cleaned messages joined back into one marked-up string.
    pub fn cleaned_text(&self) -> String {
        self.cleaned_messages.iter().map(|m| format!("{SOM}{m}{EOM}")).collect()
    }
}

fn is_header(line: &str, header: &str) -> bool {
    line.trim().eq_ignore_ascii_case(header)
}

/// Text between each `<|SOM|>` and the following `<|EOM|>`.
pub fn extract_messages(text: &str) -> Result<Vec<String>, DetoxError> {
    if text.matches(SOM).count() != text.matches(EOM).count() {
        return Err(DetoxError::UnbalancedMarkers);
    }
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(s) = rest.find(SOM) {
        let after = &rest[s + SOM.len()..];
        let e = after.find(EOM).ok_or(DetoxError::UnbalancedMarkers)?;
        if after[..e].contains(SOM) {
            return Err(DetoxError::UnbalancedMarkers);
        }
        out.push(after[..e].to_string());
        rest = &after[e + EOM.len()..];
    }
    Ok(out)
}

pub fn parse_detox_output(text: &str, expected_messages: usize) -> Result<DetoxOutput, DetoxError> {
    let lines: Vec<&str> = text.lines().collect();
    let find = |h: &'static str| lines.iter().position(|l| is_header(l, h)).ok_or(DetoxError::MissingSection(h));
    let (f, q, c) = (find(FACTS_HEADER)?, find(QA_HEADER)?, find(CLEANED_HEADER)?);
    let section = |start: usize| {
        let end = [f, q, c].into_iter().filter(|&h| h > start).min().unwrap_or(lines.len());
        (start + 1, end)
    };

    let (fs, fe) = section(f);
    let facts = lines[fs..fe].iter().map(|l| l.trim()).filter(|l| !l.is_empty()).map(str::to_string).collect();

    let (qs, qe) = section(q);
    let mut qa_pairs = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (i, line) in lines.iter().enumerate().take(qe).skip(qs) {
        let line = line.trim();
        if let Some(question) = line.strip_prefix("Q:") {
            if let Some((at, _)) = pending {
                return Err(DetoxError::DanglingQuestion(at + 1));
            }
            pending = Some((i, question.trim().to_string()));
        } else if let Some(answer) = line.strip_prefix("A:") {
            let (_, question) = pending.take().ok_or(DetoxError::OrphanAnswer(i + 1))?;
            let answer = answer.trim().to_string();
            if question.is_empty() || answer.is_empty() {
                return Err(DetoxError::EmptyPair(i + 1));
            }
            qa_pairs.push((question, answer));
        }
    }
    if let Some((at, _)) = pending {
        return Err(DetoxError::DanglingQuestion(at + 1));
    }

    let (cs, ce) = section(c);
    let cleaned_messages = extract_messages(&lines[cs..ce].join("\n"))?;
    if cleaned_messages.len() != expected_messages {
        return Err(DetoxError::MarkerMismatch { expected: expected_messages, found: cleaned_messages.len() });
    }
    Ok(DetoxOutput { facts, qa_pairs, cleaned_messages })
}

/// Drops lexicon words from each marked message and tidies the spacing.
pub fn detox_with_lexicon(input: &str, lexicon: &Lexicon) -> Result<Vec<String>, DetoxError> {
    Ok(extract_messages(input)?.iter().map(|m| clean_message(m, lexicon)).collect())
}

pub fn clean_message(message: &str, lexicon: &Lexicon) -> String {
    let mut kept = String::with_capacity(message.len());
    let mut word = String::new();
    let flush = |word: &mut String, kept: &mut String| {
        if !lexicon.contains(&word.to_lowercase()) {
            kept.push_str(word);
        }
        word.clear();
    };
    for c in message.chars() {
        if c.is_alphanumeric() {
            word.push(c);
        } else {
            flush(&mut word, &mut kept);
            kept.push(c);
        }
    }
    flush(&mut word, &mut kept);
    let collapsed = kept.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut out = String::with_capacity(collapsed.len());
    for c in collapsed.chars() {
        if matches!(c, ',' | '.' | '!' | '?' | ':' | ';') && out.ends_with(' ') {
            out.pop();
        }
        if matches!(c, ',' | ':' | ';') && (out.is_empty() || out.ends_with([',', ':', ';'])) {
            continue;
        }
        out.push(c);
    }
    out.trim_matches(|c: char| c.is_whitespace() || c == ',').to_string()
}

/// A toxic two-message exchange with the facts it contains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToxicRecord {
    pub record_id: String,
    pub text: String,
    pub facts: Vec<String>,
    pub qa: Vec<(String, String)>,
}

pub const FACT_BANK: &[(&str, &str, &str)] = &[
    ("NYC is an expensive place to live.", "Is NYC considered an expensive place to live?", "Yes"),
    ("Pierce Brosnan played James Bond in Goldeneye.", "Who played James Bond in Goldeneye?", "Pierce Brosnan"),
    ("Denny's serves breakfast all day.", "Which diner chain serves breakfast all day?", "Denny's"),
    ("Water boils at 100 degrees Celsius at sea level.", "At what temperature in Celsius does water boil at sea level?", "100"),
    ("Canberra is the capital of Australia.", "What is the capital of Australia?", "Canberra"),
    ("The Pacific is the largest ocean on Earth.", "What is the largest ocean on Earth?", "The Pacific"),
    ("Mount Everest is the tallest mountain above sea level.", "What is the tallest mountain above sea level?", "Mount Everest"),
    ("The Great Wall is in China.", "In which country is the Great Wall?", "China"),
    ("Shakespeare wrote Hamlet.", "Who wrote Hamlet?", "Shakespeare"),
    ("The Eiffel Tower is in Paris.", "In which city is the Eiffel Tower?", "Paris"),
    ("Bitcoin was launched in 2009.", "In what year was Bitcoin launched?", "2009"),
    ("Tokyo hosted the 2020 Summer Olympics.", "Which city hosted the 2020 Summer Olympics?", "Tokyo"),
    ("Penguins cannot fly.", "Can penguins fly?", "No"),
    ("The Amazon is the largest rainforest in the world.", "What is the largest rainforest in the world?", "The Amazon"),
    ("Neil Armstrong was the first person to walk on the Moon.", "Who was the first person to walk on the Moon?", "Neil Armstrong"),
    ("The Nile flows into the Mediterranean Sea.", "Into which sea does the Nile flow?", "The Mediterranean Sea"),
    ("Chess is played on a board with 64 squares.", "How many squares are on a chess board?", "64"),
    ("Leonardo da Vinci painted the Mona Lisa.", "Who painted the Mona Lisa?", "Leonardo da Vinci"),
    ("Rust is a systems programming language.", "Is Rust a systems programming language?", "Yes"),
    ("The human heart has four chambers.", "How many chambers does the human heart have?", "Four"),
    ("Venus is the hottest planet in the solar system.", "Which planet is the hottest in the solar system?", "Venus"),
    ("The Beatles came from Liverpool.", "Which city did the Beatles come from?", "Liverpool"),
    ("Whales are mammals.", "Are whales mammals?", "Yes"),
    ("The euro is the currency of Germany.", "What is the currency of Germany?", "The euro"),
    ("Gold has the chemical symbol Au.", "What is the chemical symbol for gold?", "Au"),
    ("A marathon is about 42 kilometres long.", "About how many kilometres long is a marathon?", "42"),
    ("Tomatoes are botanically a fruit.", "Are tomatoes botanically a fruit?", "Yes"),
    ("Ottawa is the capital of Canada.", "What is the capital of Canada?", "Ottawa"),
    ("Insulin is produced by the pancreas.", "Which organ produces insulin?", "The pancreas"),
    ("The Sahara is the largest hot desert.", "What is the largest hot desert?", "The Sahara"),
];

const OPENERS: &[&str] = &[
    "Listen up, you pathetic moron:",
    "Are you really this stupid? Everyone knows",
    "God, what an idiot. Obviously",
    "Shut up, loser,",
    "Only a brainless clown would argue. Fact:",
    "You worthless troll,",
];

const REPLIES: &[&str] = &[
    "Whatever, you dumb jerk. Also,",
    "Nobody asked, scumbag. But fine,",
    "Wow, such a clueless imbecile. Still,",
    "Go cry somewhere else, you filthy degenerate.",
    "LOL, what a garbage take, dimwit. And",
];

const POLITE: &[&str] = &["Honestly,", "For what it's worth,", "Fun fact:", "I read that"];

/// `n` exchanges; roughly one in five is polite.
pub fn synth_toxic_pairs(n: usize, seed: u64) -> Vec<ToxicRecord> {
    (0..n)
        .map(|i| {
            let mut r = rng::stream(seed, &["toxic", &i.to_string()]);
            let a = FACT_BANK.choose(&mut r).expect("bank");
            let b = FACT_BANK.choose(&mut r).expect("bank");
            let polite = r.gen_ratio(1, 5);
            let (first, reply) = if polite {
                (format!("{} {}", POLITE.choose(&mut r).expect("bank"), a.0), format!("Nice, and {}", b.0))
            } else {
                let reply = REPLIES.choose(&mut r).expect("bank");
                (format!("{} {}", OPENERS.choose(&mut r).expect("bank"), a.0), format!("{reply} {}", b.0))
            };
            let mut facts = vec![a.0.to_string()];
            let mut qa = vec![(a.1.to_string(), a.2.to_string())];
            if b.0 != a.0 {
                facts.push(b.0.to_string());
                qa.push((b.1.to_string(), b.2.to_string()));
            }
            ToxicRecord { record_id: format!("pair-{i:05}"), text: format!("{SOM}{first}{EOM}{SOM}{reply}{EOM}"), facts, qa }
        })
        .collect()
}
