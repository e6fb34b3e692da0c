use std::collections::HashMap;

/// Lowercase alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

pub type Bigrams = HashMap<(String, String), usize>;

pub fn bigrams(text: &str) -> Bigrams {
    let tokens = tokenize(text);
    let mut out = HashMap::new();
    for w in tokens.windows(2) {
        *out.entry((w[0].clone(), w[1].clone())).or_insert(0) += 1;
    }
    out
}

/// ROUGE-2 F-measure from precomputed bigram counts.
pub fn rouge2_f_counts(a: &Bigrams, b: &Bigrams) -> f64 {
    let na: usize = a.values().sum();
    let nb: usize = b.values().sum();
    match (na, nb) {
        (0, 0) => return 1.0,
        (0, _) | (_, 0) => return 0.0,
        _ => {}
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let overlap: usize = small.iter().map(|(k, &c)| c.min(large.get(k).copied().unwrap_or(0))).sum();
    if overlap == 0 {
        return 0.0;
    }
    let p = overlap as f64 / na as f64;
    let r = overlap as f64 / nb as f64;
    2.0 * p * r / (p + r)
}

pub fn rouge2_f(a: &str, b: &str) -> f64 {
    rouge2_f_counts(&bigrams(a), &bigrams(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_derived_pair() {
        let f = rouge2_f("the cat sat on the mat", "the cat ate");
        let expected = 2.0 * (0.5 * 0.2) / (0.5 + 0.2);
        assert!((f - expected).abs() < 1e-12);
        assert!((f - 0.2857).abs() < 0.0005);
    }

    #[test]
    fn edge_cases() {
        assert_eq!(rouge2_f("a b c", "A, b. C!"), 1.0);
        assert_eq!(rouge2_f("a b", "c d"), 0.0);
        assert_eq!(rouge2_f("", ""), 1.0);
        assert_eq!(rouge2_f("word", ""), 1.0);
        assert_eq!(rouge2_f("two words", ""), 0.0);
    }

    #[test]
    fn clipped_counts() {
        // "a a a" has bigram (a,a) twice; "a a" once.
        let f = rouge2_f("a a a", "a a");
        let expected = 2.0 * (1.0 / 2.0) * 1.0 / (1.0 / 2.0 + 1.0);
        assert!((f - expected).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in "[a-c ]{0,20}", b in "[a-c ]{0,20}") {
            let x = rouge2_f(&a, &b);
            prop_assert!((x - rouge2_f(&b, &a)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&x));
        }
    }
}
