//! Check-digit algorithms used by format specifications.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChecksumError {
    #[error("empty input")]
    Empty,
    #[error("non-digit character {ch:?} at index {index}")]
    NonDigit { ch: char, index: usize },
    #[error("non-alphanumeric character {ch:?} at index {index}")]
    NonAlphanumeric { ch: char, index: usize },
    #[error("input of length {0} is too short for a mod-97 check")]
    TooShort(usize),
}

fn digits(text: &str) -> Result<Vec<u32>, ChecksumError> {
    if text.is_empty() {
        return Err(ChecksumError::Empty);
    }
    text.chars()
        .enumerate()
        .map(|(index, ch)| ch.to_digit(10).filter(|_| ch.is_ascii_digit()).ok_or(ChecksumError::NonDigit { ch, index }))
        .collect()
}

fn luhn_sum(digits: &[u32], double_last: bool) -> u32 {
    digits
        .iter()
        .rev()
        .enumerate()
        .map(|(i, &d)| {
            let double = (i % 2 == 0) == double_last;
            if double {
                let x = d * 2;
                if x > 9 {
                    x - 9
                } else {
                    x
                }
            } else {
                d
            }
        })
        .sum()
}

/// Standard Luhn validity over a pure digit string.
pub fn luhn_check(text: &str) -> Result<bool, ChecksumError> {
    let ds = digits(text)?;
    Ok(luhn_sum(&ds, false).is_multiple_of(10))
}

/// The digit that, appended to `payload`, makes it Luhn-valid.
pub fn luhn_check_digit(payload: &str) -> Result<u32, ChecksumError> {
    if payload.is_empty() {
        return Ok(0);
    }
    let ds = digits(payload)?;
    Ok((10 - luhn_sum(&ds, true) % 10) % 10)
}

/// ISO 7064 MOD 97-10 remainder of `text` read left to right, letters mapped
/// A=10 .. Z=35 (case-insensitive).
pub fn mod97_remainder(text: &str) -> Result<u32, ChecksumError> {
    if text.is_empty() {
        return Err(ChecksumError::Empty);
    }
    let mut rem = 0u32;
    for (index, ch) in text.chars().enumerate() {
        if ch.is_ascii_digit() {
            rem = (rem * 10 + (ch as u32 - '0' as u32)) % 97;
        } else if ch.is_ascii_alphabetic() {
            let v = ch.to_ascii_uppercase() as u32 - 'A' as u32 + 10;
            rem = (rem * 100 + v) % 97;
        } else {
            return Err(ChecksumError::NonAlphanumeric { ch, index });
        }
    }
    Ok(rem)
}

fn iban_rotate(text: &str) -> String {
    let split = text.char_indices().nth(4).map(|(i, _)| i).unwrap_or(text.len());
    format!("{}{}", &text[split..], &text[..split])
}

/// IBAN-layout mod-97 validity: the two check digits sit at positions 3-4,
/// the first four characters rotate to the end, and the remainder must be 1.
pub fn mod97_check(text: &str) -> Result<bool, ChecksumError> {
    let len = text.chars().count();
    if len == 0 {
        return Err(ChecksumError::Empty);
    }
    if len < 5 {
        return Err(ChecksumError::TooShort(len));
    }
    Ok(mod97_remainder(&iban_rotate(text))? == 1)
}

/// Check digits for an IBAN-layout string whose positions 3-4 are ignored.
pub fn mod97_check_digits(text: &str) -> Result<u32, ChecksumError> {
    let len = text.chars().count();
    if len < 5 {
        return Err(ChecksumError::TooShort(len));
    }
    let zeroed: String = text
        .chars()
        .enumerate()
        .map(|(i, c)| if i == 2 || i == 3 { '0' } else { c })
        .collect();
    Ok(98 - mod97_remainder(&iban_rotate(&zeroed))?)
}

/// Weighted-sum check value: `sum(w[i % len] * d[i]) mod modulus`, weights
/// applied left to right and cycled when the payload is longer.
pub fn weighted_check_value(payload: &str, weights: &[u32], modulus: u32) -> Result<u32, ChecksumError> {
    let ds = digits(payload)?;
    let sum: u64 = ds
        .iter()
        .enumerate()
        .map(|(i, &d)| u64::from(weights[i % weights.len()]) * u64::from(d))
        .sum();
    Ok((sum % u64::from(modulus)) as u32)
}
