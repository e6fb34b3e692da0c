//! Cross-checks published constants and embedded prompt text against the
//! source document at the workspace root.

use std::path::PathBuf;

use refinery_core::engine::prompts;
use refinery_core::evaluation::ReferenceFigures;

fn source() -> Option<String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../paper.md");
    match std::fs::read_to_string(&path) {
        Ok(text) => Some(text),
        Err(_) => {
            eprintln!("{} not present; skipping", path.display());
            None
        }
    }
}

/// Strips the LaTeX colour macros and escapes around the prompt text.
fn unlatex(text: &str) -> String {
    let colour = regex::Regex::new(r"\\textcolor\{\w+\}\{((?:\\[{}]|[^{}])*)\}").unwrap();
    let text = colour.replace_all(text, "$1");
    let escape = regex::Regex::new(r"\\([{}$_&#%])").unwrap();
    // "worldinside" is a typo in the document; the embedded prompt carries the space.
    escape.replace_all(&text, "$1").replace("worldinside", "world inside")
}

fn squash(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Numbers in a table row, with LaTeX markup removed.
fn row_numbers(doc: &str, label: &str) -> Vec<f64> {
    let line = doc.lines().find(|l| l.trim_start().starts_with(label) && l.contains('&')).unwrap_or_else(|| panic!("no row {label}"));
    line.split('&')
        .skip(1)
        .map(|cell| {
            let digits: String = cell.chars().filter(|c| c.is_ascii_digit() || *c == '.').collect();
            digits.trim_matches('.').parse().unwrap_or_else(|_| panic!("cell {cell:?}"))
        })
        .collect()
}

#[test]
fn pii_table_rows() {
    let Some(doc) = source() else { return };
    let r = ReferenceFigures::default();
    let rule = r.pii_rule_based;
    let gen = r.pii_generative;
    assert_eq!(row_numbers(&doc, "DIRS"), vec![rule.recall, rule.precision, rule.f_score]);
    assert_eq!(row_numbers(&doc, "GDR"), vec![gen.recall, gen.precision, gen.f_score]);
}

#[test]
fn company_rows() {
    let Some(doc) = source() else { return };
    let r = ReferenceFigures::default();
    let public = row_numbers(&doc, "Public accuracy");
    let private = row_numbers(&doc, "Private accuracy");
    let row = |c: refinery_core::evaluation::CompaniesRow| vec![c.m, c.m_dirs, c.m_refined];
    assert_eq!(public, row(r.companies_public));
    assert_eq!(private, row(r.companies_private));
}

#[test]
fn diversity_and_toxicity_rows() {
    let Some(doc) = source() else { return };
    let r = ReferenceFigures::default();
    let corpus = |c: refinery_core::evaluation::CorpusRow<f64>| vec![c.raw, c.refined, c.synthetic];
    let rows: Vec<Vec<f64>> = ["Raw ", "Refined &", "Synthetic &"].iter().map(|l| row_numbers(&doc, l)).collect();
    assert_eq!(rows.iter().map(|v| v[0]).collect::<Vec<_>>(), corpus(r.embedding_distance));
    assert_eq!(rows.iter().map(|v| v[1]).collect::<Vec<_>>(), corpus(r.rouge2));
    let toxicity = doc.lines().find(|l| l.contains("0.19 &")).map(|l| {
        l.split('&').map(|c| c.chars().filter(|c| c.is_ascii_digit() || *c == '.').collect::<String>().parse::<f64>().unwrap()).collect::<Vec<_>>()
    });
    assert_eq!(toxicity, Some(corpus(r.toxicity_mean)));
    assert_eq!(row_numbers(&doc, "No fine-tuning")[0], r.quiz_accuracy.no_finetune);
    assert_eq!(row_numbers(&doc, "Refined pol100k")[0], r.quiz_accuracy.refined);
}

#[test]
fn prompts_are_verbatim() {
    let Some(doc) = source() else { return };
    let doc = squash(&unlatex(&doc));
    let all = [
        ("pii", prompts::PII_SENTENCE),
        ("companies", prompts::COMPANIES_JSON),
        ("code", prompts::CODE_LINE),
        ("detox", prompts::DETOX_PAIR),
        ("positive templates", prompts::POSITIVE_TEMPLATE_GEN),
        ("typed templates", prompts::TYPED_TEMPLATE_GEN),
        ("negative templates", prompts::NEGATIVE_TEMPLATE_GEN),
        ("response id", prompts::LLM_RESPONSE_ID),
    ];
    let mut missing = Vec::new();
    for (name, prompt) in all {
        for para in prompt.split("\n\n").map(squash).filter(|p| p.len() > 40) {
            if !doc.contains(&para) {
                missing.push(format!("{name}: {}", para.chars().take(120).collect::<String>()));
            }
        }
    }
    assert!(missing.is_empty(), "{missing:#?}");
}

#[test]
fn example_strings_occur_in_source() {
    let Some(doc) = source() else { return };
    let doc = squash(&unlatex(&doc));
    for needle in [
        "6687-7593-7744",
        "668775937744 individual pen strokes",
        "taiwan passport, which is 130596315",
        "130596315 liters",
        "listed as 81404096586",
        "listed as 12345678910",
        "81404096586 planets",
        "abcdef-abcdefghiabcdefghiabcdefghi",
        "var ip_address = '169.08.16.02'",
        "HASH_FUNCTION.hashString(upass",
        "hashString(abcdef",
        "My House",
        "Is NYC considered an expensive place to live?",
        "Pierce Brosnan",
        "Denny's",
        "Zenith Bionics & Evelyn Hayes & Isabella Torres",
        "Verdant Fields Organics",
        "Dr. Amelia Sanchez",
    ] {
        let relaxed = doc.replace('’', "'");
        assert!(relaxed.contains(needle), "{needle:?} not found");
    }
}
