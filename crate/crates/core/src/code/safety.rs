use globset::{GlobBuilder, GlobSet, GlobSetBuilder};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;

use crate::engine::PlaceholderPolicy;

const BUILTIN_SAFE_DEFAULTS: &str = include_str!("../../data/safe_defaults.txt");
const HASH_MIN_LEN: usize = 12;

static HEX_RUN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[0-9A-Fa-f]+").expect("static regex"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SafetyFlag {
    NonStringRewrite,
    PlaceholderToPlaceholder,
    LengthMismatch,
}

impl SafetyFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SafetyFlag::NonStringRewrite => "non_string_rewrite",
            SafetyFlag::PlaceholderToPlaceholder => "placeholder_to_placeholder",
            SafetyFlag::LengthMismatch => "length_mismatch",
        }
    }
}

/// A run of code or one quoted literal, delimiters included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Code(String),
    Literal { quote: char, content: String, closed: bool },
}

impl Segment {
    fn is_literal(&self) -> bool {
        matches!(self, Segment::Literal { .. })
    }
}

/// Splits a line on single, double and backtick quotes, honouring backslash
/// escapes inside literals. An unterminated literal runs to end of line.
pub fn scan_segments(line: &str) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut code = String::new();
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        if matches!(c, '"' | '\'' | '`') {
            if !code.is_empty() {
                out.push(Segment::Code(std::mem::take(&mut code)));
            }
            let mut content = String::new();
            let mut closed = false;
            while let Some(d) = chars.next() {
                if d == '\\' {
                    content.push(d);
                    if let Some(e) = chars.next() {
                        content.push(e);
                    }
                } else if d == c {
                    closed = true;
                    break;
                } else {
                    content.push(d);
                }
            }
            out.push(Segment::Literal { quote: c, content, closed });
        } else {
            code.push(c);
        }
    }
    if !code.is_empty() {
        out.push(Segment::Code(code));
    }
    out
}

fn changed_extent(a: &str, b: &str) -> (usize, usize) {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let max_suffix = a.len().min(b.len()) - prefix;
    let suffix = a.iter().rev().zip(b.iter().rev()).take(max_suffix).take_while(|(x, y)| x == y).count();
    (a.len() - prefix - suffix, b.len() - prefix - suffix)
}

pub struct SafetyChecker {
    pub policy: PlaceholderPolicy,
    safe_defaults: GlobSet,
}

impl Default for SafetyChecker {
    fn default() -> Self {
        SafetyChecker::with_policy(PlaceholderPolicy::default())
    }
}

impl SafetyChecker {
    /// `safe_defaults` holds one glob per line; `#` starts a comment line.
    pub fn new(policy: PlaceholderPolicy, safe_defaults: &str) -> Result<Self, globset::Error> {
        let mut builder = GlobSetBuilder::new();
        for line in safe_defaults.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            builder.add(GlobBuilder::new(line).case_insensitive(true).literal_separator(false).build()?);
        }
        Ok(SafetyChecker { policy, safe_defaults: builder.build()? })
    }

    /// Bundled safe-default list with a custom placeholder policy.
    pub fn with_policy(policy: PlaceholderPolicy) -> Self {
        SafetyChecker::new(policy, BUILTIN_SAFE_DEFAULTS).expect("builtin safe defaults")
    }

    pub fn is_safe_default(&self, value: &str) -> bool {
        self.safe_defaults.is_match(value.trim())
    }

    fn placeholder_like(&self, value: &str) -> bool {
        PlaceholderPolicy::looks_like_placeholder(value) || self.is_safe_default(value)
    }

    pub fn check(&self, original: &str, output: &str) -> Vec<SafetyFlag> {
        let mut flags = Vec::new();
        if original == output {
            return flags;
        }
        let before = scan_segments(original);
        let after = scan_segments(output);
        let aligned = before.len() == after.len()
            && before.iter().zip(&after).all(|(a, b)| a.is_literal() == b.is_literal());
        if !aligned {
            flags.push(SafetyFlag::NonStringRewrite);
            let (old, new) = changed_extent(original, output);
            if self.policy.length_match && old != new {
                flags.push(SafetyFlag::LengthMismatch);
            }
        } else {
            for (a, b) in before.iter().zip(&after) {
                if a == b {
                    continue;
                }
                match (a, b) {
                    (Segment::Code(x), Segment::Code(y)) => {
                        flags.push(SafetyFlag::NonStringRewrite);
                        let (old, new) = changed_extent(x, y);
                        if self.policy.length_match && old != new {
                            flags.push(SafetyFlag::LengthMismatch);
                        }
                    }
                    (Segment::Literal { content: x, .. }, Segment::Literal { content: y, .. }) => {
                        if x == y {
                            // Only the quote style changed.
                            flags.push(SafetyFlag::NonStringRewrite);
                            continue;
                        }
                        if self.placeholder_like(x) {
                            flags.push(SafetyFlag::PlaceholderToPlaceholder);
                        }
                        if self.policy.length_match && x.chars().count() != y.chars().count() {
                            flags.push(SafetyFlag::LengthMismatch);
                        }
                    }
                    _ => unreachable!("segments aligned by kind"),
                }
            }
        }
        flags.sort_unstable();
        flags.dedup();
        flags
    }
}

/// Flags for one rewrite, using the bundled safe-default list.
pub fn safety_check(original: &str, output: &str) -> Vec<SafetyFlag> {
    static CHECKER: LazyLock<SafetyChecker> = LazyLock::new(SafetyChecker::default);
    CHECKER.check(original, output)
}

/// Advisory: a hex run of at least 12 characters containing a digit,
/// bounded by non-alphanumerics.
pub fn hash_candidate(line: &str) -> bool {
    HEX_RUN.find_iter(line).any(|m| {
        let before = line[..m.start()].chars().next_back();
        let after = line[m.end()..].chars().next();
        let bounded = !before.is_some_and(char::is_alphanumeric) && !after.is_some_and(char::is_alphanumeric);
        bounded && m.len() >= HASH_MIN_LEN && m.as_str().bytes().any(|b| b.is_ascii_digit())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scanner() {
        let segs = scan_segments(r#"a = "x\"y" + 'z"#);
        assert_eq!(
            segs,
            vec![
                Segment::Code("a = ".into()),
                Segment::Literal { quote: '"', content: r#"x\"y"#.into(), closed: true },
                Segment::Code(" + ".into()),
                Segment::Literal { quote: '\'', content: "z".into(), closed: false },
            ]
        );
        assert!(scan_segments("").is_empty());
    }

    #[test]
    fn identifier_replaced() {
        let flags = safety_check(
            "HashCode hash0 = HASH_FUNCTION.hashString(upass, Charsets.UTF_8);",
            "HashCode hash0 = HASH_FUNCTION.hashString(abcdef, Charsets.UTF_8);",
        );
        assert!(flags.contains(&SafetyFlag::NonStringRewrite));
        assert!(!flags.contains(&SafetyFlag::PlaceholderToPlaceholder));
    }

    #[test]
    fn identifier_becomes_literal() {
        let flags = safety_check(
            r#"header["client-device"] = UIDevice.bk_uuid"#,
            r#"header["client-device"] = "12345678-90ab-cdef-ghij-klmnopqrstuv""#,
        );
        assert!(flags.contains(&SafetyFlag::NonStringRewrite));
        let flags = safety_check(
            r#"cl.l.WithFields(cl.f).WithField("file", getCaller()).Debug(args...)"#,
            r#"cl.l.WithFields(cl.f).WithField("file", getCaller()).Debug("12345")"#,
        );
        assert!(flags.contains(&SafetyFlag::NonStringRewrite));
    }

    #[test]
    fn safe_string_in_quotes() {
        let flags = safety_check(r#"address: "My House","#, r#"address: "123 Main Street","#);
        assert!(!flags.contains(&SafetyFlag::NonStringRewrite));
        assert!(flags.contains(&SafetyFlag::PlaceholderToPlaceholder));
        assert!(flags.contains(&SafetyFlag::LengthMismatch));
    }

    #[test]
    fn real_value_in_quotes() {
        let flags = safety_check("var ip_address = '169.08.16.02'", "var ip_address = '123.45.67.89'");
        assert!(flags.is_empty(), "{flags:?}");
        let flags = safety_check(r#"key = "00000000""#, r#"key = "12345678""#);
        assert_eq!(flags, vec![SafetyFlag::PlaceholderToPlaceholder]);
    }

    #[test]
    fn safe_default_globs() {
        let c = SafetyChecker::default();
        for v in ["${PORT}", "{{name}}", "<token>", "ops@example.com", "192.168.1.20", "LOCALHOST"] {
            assert!(c.is_safe_default(v), "{v}");
        }
        for v in ["169.08.16.02", "shrivrealestate", "alice@corpmail.net", "$PORT"] {
            assert!(!c.is_safe_default(v), "{v}");
        }
    }

    #[test]
    fn unchanged_and_hashes() {
        assert!(safety_check("}", "}").is_empty());
        assert!(hash_candidate("sha = 'd41d8cd98f00b204e9800998ecf8427e'"));
        assert!(!hash_candidate("x = 'deadbeefcafe'"));
        assert!(!hash_candidate("id = 12345678901"));
        assert!(hash_candidate("id = 123456789012"));
        assert!(!hash_candidate("word_0123456789abz"));
    }

    proptest! {
        #[test]
        fn unchanged_never_flagged(line in r#"[a-z0-9 ="'`\\(){}.,]{0,40}"#) {
            prop_assert!(safety_check(&line, &line).is_empty());
        }

        #[test]
        fn scanner_preserves_code_chars(line in "[a-z0-9 =(){}.,;]{0,40}") {
            let segs = scan_segments(&line);
            let joined: String = segs.iter().map(|s| match s { Segment::Code(c) => c.clone(), _ => unreachable!() }).collect();
            prop_assert_eq!(joined, line);
        }
    }
}
