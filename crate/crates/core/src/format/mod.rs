//! Declarative PII string formats.
//!
//! A [`FormatSpec`] describes one category's surface form as a sequence of
//! segments plus an optional check-digit rule. The same spec drives value
//! generation, validation, and the surface regexes of the rule-based detector.

mod catalog;
pub mod checksum;
mod dsl;

pub use catalog::{parse_hotwords, Catalog, CatalogError};
pub use checksum::{luhn_check, mod97_check, ChecksumError};
pub use dsl::{parse_catalog_dsl, parse_format_spec, render_format_spec, ParseError, ParseErrorKind};

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

const UPPER: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
const ALNUM: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Segment {
    Literal(String),
    /// `dN`: N ASCII digits.
    Digits(usize),
    /// `aN`: N uppercase ASCII letters.
    Upper(usize),
    /// `xN`: N ASCII alphanumerics, either case.
    Alnum(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Checksum {
    None,
    /// One Luhn check digit appended after the last digit run.
    Luhn,
    /// Two check digits at stripped positions 3-4, IBAN layout.
    Mod97,
    /// One check digit appended after the last digit run, equal to the
    /// weighted digit sum modulo `modulus`; payloads whose check value is
    /// 10 or more are invalid.
    WeightedSum { weights: Vec<u32>, modulus: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("category {0:?} has no segments")]
    Empty(String),
    #[error("segment length must be at least 1")]
    ZeroLength,
    #[error("empty literal")]
    EmptyLiteral,
    #[error("checksum {checksum} on {category:?}: {reason}")]
    ChecksumPlacement { category: String, checksum: &'static str, reason: &'static str },
    #[error("category {0:?} is not numeric")]
    NotNumeric(String),
    #[error("invalid category id {0:?}")]
    BadId(String),
}

/// Character class of one position of the delimiter-stripped value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Fixed(char),
    Digit,
    Upper,
    Alnum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatSpec {
    pub category_id: String,
    pub display_name: String,
    pub segments: Vec<Segment>,
    /// Non-alphanumeric characters contributed by literal segments, sorted.
    pub delimiters: Vec<char>,
    pub checksum: Checksum,
    pub numeric_only: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiiValue {
    pub category_id: String,
    pub raw: String,
    pub stripped: String,
    pub seed: u64,
}

fn is_delimiter(c: char) -> bool {
    !c.is_alphanumeric()
}

pub(crate) fn default_display_name(id: &str) -> String {
    id.replace('_', " ")
}

pub(crate) fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
        && id.starts_with(|c: char| c.is_ascii_lowercase())
}

impl FormatSpec {
    pub fn new(
        category_id: impl Into<String>,
        display_name: Option<String>,
        segments: Vec<Segment>,
        checksum: Checksum,
    ) -> Result<Self, FormatError> {
        let category_id = category_id.into();
        if !valid_id(&category_id) {
            return Err(FormatError::BadId(category_id));
        }
        if segments.is_empty() {
            return Err(FormatError::Empty(category_id));
        }
        let mut delimiters = BTreeSet::new();
        let mut numeric_only = true;
        for seg in &segments {
            match seg {
                Segment::Literal(s) => {
                    if s.is_empty() {
                        return Err(FormatError::EmptyLiteral);
                    }
                    for c in s.chars() {
                        if is_delimiter(c) {
                            delimiters.insert(c);
                        } else if !c.is_ascii_digit() {
                            numeric_only = false;
                        }
                    }
                }
                Segment::Digits(0) | Segment::Upper(0) | Segment::Alnum(0) => return Err(FormatError::ZeroLength),
                Segment::Digits(_) => {}
                Segment::Upper(_) | Segment::Alnum(_) => numeric_only = false,
            }
        }
        let spec = FormatSpec {
            display_name: display_name.unwrap_or_else(|| default_display_name(&category_id)),
            category_id,
            segments,
            delimiters: delimiters.into_iter().collect(),
            checksum,
            numeric_only,
        };
        spec.check_checksum_placement()?;
        Ok(spec)
    }

    fn placement_err(&self, checksum: &'static str, reason: &'static str) -> FormatError {
        FormatError::ChecksumPlacement { category: self.category_id.clone(), checksum, reason }
    }

    fn check_checksum_placement(&self) -> Result<(), FormatError> {
        match &self.checksum {
            Checksum::None => Ok(()),
            Checksum::Luhn | Checksum::WeightedSum { .. } => {
                let name = if self.checksum == Checksum::Luhn { "luhn" } else { "weighted" };
                if !self.numeric_only {
                    return Err(self.placement_err(name, "requires an all-digit format"));
                }
                if self.check_digit_segment().is_none() {
                    return Err(self.placement_err(name, "last non-literal segment must be a digit run"));
                }
                if let Checksum::WeightedSum { weights, modulus } = &self.checksum {
                    if weights.is_empty() {
                        return Err(self.placement_err(name, "needs at least one weight"));
                    }
                    if *modulus < 2 {
                        return Err(self.placement_err(name, "modulus must be at least 2"));
                    }
                }
                Ok(())
            }
            Checksum::Mod97 => {
                let slots = self.slots();
                if slots.len() < 5 {
                    return Err(self.placement_err("mod97", "needs at least 5 significant characters"));
                }
                if slots[2] != Slot::Digit || slots[3] != Slot::Digit {
                    return Err(self.placement_err("mod97", "positions 3-4 must come from a digit run"));
                }
                if slots.iter().any(|s| matches!(s, Slot::Alnum) || matches!(s, Slot::Fixed(c) if c.is_lowercase() || !c.is_ascii()))
                {
                    return Err(self.placement_err("mod97", "only digits and uppercase letters are allowed"));
                }
                Ok(())
            }
        }
    }

    /// Index of the segment that carries an appended check digit.
    fn check_digit_segment(&self) -> Option<usize> {
        let idx = self.segments.iter().rposition(|s| !matches!(s, Segment::Literal(_)))?;
        matches!(self.segments[idx], Segment::Digits(_)).then_some(idx)
    }

    fn appends_check_digit(&self) -> bool {
        matches!(self.checksum, Checksum::Luhn | Checksum::WeightedSum { .. })
    }

    fn slots(&self) -> Vec<Slot> {
        let mut out = Vec::new();
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => out.extend(s.chars().filter(|c| !is_delimiter(*c)).map(Slot::Fixed)),
                Segment::Digits(n) => out.extend(std::iter::repeat_n(Slot::Digit, *n)),
                Segment::Upper(n) => out.extend(std::iter::repeat_n(Slot::Upper, *n)),
                Segment::Alnum(n) => out.extend(std::iter::repeat_n(Slot::Alnum, *n)),
            }
        }
        if self.appends_check_digit() {
            out.push(Slot::Digit);
        }
        out
    }

    /// Rendered length in characters, including delimiters and check digits.
    pub fn rendered_len(&self) -> usize {
        let body: usize = self
            .segments
            .iter()
            .map(|s| match s {
                Segment::Literal(l) => l.chars().count(),
                Segment::Digits(n) | Segment::Upper(n) | Segment::Alnum(n) => *n,
            })
            .sum();
        body + usize::from(self.appends_check_digit())
    }

    /// Length of the delimiter-stripped value.
    pub fn stripped_len(&self) -> usize {
        self.slots().len()
    }

    pub fn has_delimiters(&self) -> bool {
        !self.delimiters.is_empty()
    }

    /// Removes exactly this spec's delimiter characters.
    pub fn strip(&self, raw: &str) -> String {
        raw.chars().filter(|c| !self.delimiters.contains(c)).collect()
    }

    /// Draws one value. Deterministic in `(self, seed)`; the result always
    /// validates against `self`.
    pub fn generate(&self, seed: u64) -> PiiValue {
        let mut rng = rng::stream(seed, &["format", &self.category_id]);
        loop {
            if let Some(raw) = self.try_generate(&mut rng) {
                return PiiValue { category_id: self.category_id.clone(), stripped: self.strip(&raw), raw, seed };
            }
        }
    }

    fn try_generate<R: Rng>(&self, rng: &mut R) -> Option<String> {
        let check_seg = if self.appends_check_digit() { self.check_digit_segment() } else { None };
        let mut raw: Vec<char> = Vec::with_capacity(self.rendered_len());
        // Raw index of every non-delimiter character, in order.
        let mut significant: Vec<usize> = Vec::new();
        let mut check_at = None;
        for (i, seg) in self.segments.iter().enumerate() {
            match seg {
                Segment::Literal(s) => {
                    for c in s.chars() {
                        if !is_delimiter(c) {
                            significant.push(raw.len());
                        }
                        raw.push(c);
                    }
                }
                Segment::Digits(n) => {
                    for _ in 0..*n {
                        significant.push(raw.len());
                        raw.push(char::from(b'0' + rng.gen_range(0..10u8)));
                    }
                    if check_seg == Some(i) {
                        check_at = Some(raw.len());
                        significant.push(raw.len());
                        raw.push('0');
                    }
                }
                Segment::Upper(n) => {
                    for _ in 0..*n {
                        significant.push(raw.len());
                        raw.push(char::from(UPPER[rng.gen_range(0..UPPER.len())]));
                    }
                }
                Segment::Alnum(n) => {
                    for _ in 0..*n {
                        significant.push(raw.len());
                        raw.push(char::from(ALNUM[rng.gen_range(0..ALNUM.len())]));
                    }
                }
            }
        }
        match &self.checksum {
            Checksum::None => {}
            Checksum::Luhn => {
                let at = check_at?;
                let payload: String = significant.iter().filter(|&&i| i != at).map(|&i| raw[i]).collect();
                let d = checksum::luhn_check_digit(&payload).ok()?;
                raw[at] = char::from_digit(d, 10)?;
            }
            Checksum::WeightedSum { weights, modulus } => {
                let at = check_at?;
                let payload: String = significant.iter().filter(|&&i| i != at).map(|&i| raw[i]).collect();
                let v = checksum::weighted_check_value(&payload, weights, *modulus).ok()?;
                if v >= 10 {
                    return None;
                }
                raw[at] = char::from_digit(v, 10)?;
            }
            Checksum::Mod97 => {
                let stripped: String = significant.iter().map(|&i| raw[i]).collect();
                let cd = checksum::mod97_check_digits(&stripped).ok()?;
                raw[significant[2]] = char::from_digit(cd / 10, 10)?;
                raw[significant[3]] = char::from_digit(cd % 10, 10)?;
            }
        }
        Some(raw.into_iter().collect())
    }

    /// True iff `candidate` matches the segment pattern exactly and satisfies
    /// the checksum.
    pub fn validate(&self, candidate: &str) -> bool {
        if !self.matches_pattern(candidate) {
            return false;
        }
        let stripped = self.strip(candidate);
        match &self.checksum {
            Checksum::None => true,
            Checksum::Luhn => checksum::luhn_check(&stripped).unwrap_or(false),
            Checksum::Mod97 => checksum::mod97_check(&stripped).unwrap_or(false),
            Checksum::WeightedSum { weights, modulus } => {
                let Some((payload, last)) = stripped.char_indices().last().map(|(i, c)| (&stripped[..i], c)) else {
                    return false;
                };
                match (checksum::weighted_check_value(payload, weights, *modulus), last.to_digit(10)) {
                    (Ok(v), Some(d)) => v == d,
                    _ => false,
                }
            }
        }
    }

    /// Pattern-only match (no checksum).
    pub fn matches_pattern(&self, candidate: &str) -> bool {
        let check_seg = if self.appends_check_digit() { self.check_digit_segment() } else { None };
        let chars: Vec<char> = candidate.chars().collect();
        let mut pos = 0;
        for (i, seg) in self.segments.iter().enumerate() {
            let (n, ok): (usize, fn(char) -> bool) = match seg {
                Segment::Literal(s) => {
                    for c in s.chars() {
                        if chars.get(pos) != Some(&c) {
                            return false;
                        }
                        pos += 1;
                    }
                    continue;
                }
                Segment::Digits(n) => (*n + usize::from(check_seg == Some(i)), |c| c.is_ascii_digit()),
                Segment::Upper(n) => (*n, |c| c.is_ascii_uppercase()),
                Segment::Alnum(n) => (*n, |c| c.is_ascii_alphanumeric()),
            };
            if pos + n > chars.len() || !chars[pos..pos + n].iter().all(|&c| ok(c)) {
                return false;
            }
            pos += n;
        }
        pos == chars.len()
    }

    /// Regex source (unanchored) for the delimiter-exact surface form.
    pub fn surface_regex(&self) -> String {
        let check_seg = if self.appends_check_digit() { self.check_digit_segment() } else { None };
        let mut out = String::new();
        for (i, seg) in self.segments.iter().enumerate() {
            match seg {
                Segment::Literal(s) => out.push_str(&regex::escape(s)),
                Segment::Digits(n) => out.push_str(&format!("[0-9]{{{}}}", n + usize::from(check_seg == Some(i)))),
                Segment::Upper(n) => out.push_str(&format!("[A-Z]{{{n}}}")),
                Segment::Alnum(n) => out.push_str(&format!("[A-Za-z0-9]{{{n}}}")),
            }
        }
        out
    }
}

/// Delimiter-stripped digits of a value from a numeric category.
pub fn strip_delimiters(spec: &FormatSpec, raw: &str) -> Result<String, FormatError> {
    if !spec.numeric_only {
        return Err(FormatError::NotNumeric(spec.category_id.clone()));
    }
    Ok(spec.strip(raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn independent_luhn(s: &str) -> bool {
        // Straight textbook form: double every second digit from the right.
        let mut total = 0;
        for (i, c) in s.chars().rev().enumerate() {
            let mut d = c.to_digit(10).unwrap();
            if i % 2 == 1 {
                d *= 2;
                if d > 9 {
                    d = d / 10 + d % 10;
                }
            }
            total += d;
        }
        total % 10 == 0
    }

    fn ssn() -> FormatSpec {
        parse_format_spec("ssn := d3 '-' d2 '-' d4").unwrap()
    }

    #[test]
    fn ssn_shape() {
        let s = ssn();
        assert_eq!(s.segments.len(), 5);
        assert!(s.numeric_only);
        assert_eq!(s.checksum, Checksum::None);
        assert_eq!(s.delimiters, vec!['-']);
        assert!(s.validate("123-45-6789"));
        assert!(!s.validate("123456789"));
        assert!(!s.validate("123-45-678"));
        assert!(!s.validate("123-45-67890"));
    }

    #[test]
    fn generation_is_deterministic() {
        let s = ssn();
        assert_eq!(s.generate(7), s.generate(7));
        assert_ne!(s.generate(7).raw, s.generate(8).raw);
    }

    #[test]
    fn card_has_sixteen_luhn_digits() {
        let card = parse_format_spec("card := d15 luhn").unwrap();
        assert_eq!(card.rendered_len(), 16);
        for seed in 0..200 {
            let v = card.generate(seed);
            assert_eq!(v.raw.len(), 16);
            assert!(independent_luhn(&v.raw), "{}", v.raw);
            assert!(card.validate(&v.raw));
        }
    }

    #[test]
    fn luhn_spec_validates_reference_numbers() {
        let spec = parse_format_spec("ref := d10 luhn").unwrap();
        assert!(spec.validate("49927398716"));
        assert!(!spec.validate("49927398717"));
    }

    #[test]
    fn iban_generation() {
        let spec = parse_format_spec("iban_gb := 'GB' d2 a4 d14 mod97").unwrap();
        assert!(!spec.numeric_only);
        assert!(spec.validate("GB82WEST12345698765432"));
        for seed in 0..100 {
            let v = spec.generate(seed);
            assert!(spec.validate(&v.raw), "{}", v.raw);
            assert!(mod97_check(&v.raw).unwrap());
        }
    }

    #[test]
    fn weighted_generation() {
        let spec = parse_format_spec("nhs := d3 ' ' d3 ' ' d3 weighted(1,2,3,4,5,6,7,8,9;11)").unwrap();
        assert!(spec.validate("943 476 5919"));
        assert!(!spec.validate("943 476 5918"));
        for seed in 0..100 {
            assert!(spec.validate(&spec.generate(seed).raw));
        }
    }

    #[test]
    fn strip_examples() {
        let card12 = parse_format_spec("card12 := d4 '-' d4 '-' d3 luhn").unwrap();
        assert_eq!(strip_delimiters(&card12, "6687-7593-7744").unwrap(), "668775937744");
        let tw = parse_format_spec("taiwan_passport := d9").unwrap();
        assert_eq!(strip_delimiters(&tw, "130596315").unwrap(), "130596315");
        assert_eq!(strip_delimiters(&tw, "").unwrap(), "");
        let tok = parse_format_spec("tok := 'ghp_' x36").unwrap();
        assert_eq!(strip_delimiters(&tok, "ghp_x"), Err(FormatError::NotNumeric("tok".into())));
    }

    #[test]
    fn placement_errors() {
        assert!(matches!(parse_format_spec("bad := a4 luhn"), Err(ParseError { kind: ParseErrorKind::Format(_), .. })));
        assert!(parse_format_spec("bad := 'AB' d1 a4 mod97").is_err());
        assert!(parse_format_spec("bad := d4 '-' a2 luhn").is_err());
    }
}
