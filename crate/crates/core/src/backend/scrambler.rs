use std::sync::atomic::{AtomicU64, Ordering};

use super::{Backend, BackendDescriptor, BackendError, BackendKind, CompletionRequest};
use crate::engine::cycling_digits;

const MIN_DIGITS: usize = 8;
const MAX_GAP: usize = 2;

fn is_gap(c: char) -> bool {
    matches!(c, '-' | '.' | '/' | '#' | '(' | ')' | ' ')
}

/// Replaces every digit run holding at least eight digits with cycling
/// digits `1234567890...`. A run may bridge gaps of one or two separator
/// characters (`- . / # ( )` or space); separators are kept in place.
pub fn scramble(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = chars.clone();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let mut digits = vec![i];
        let mut j = i + 1;
        loop {
            while j < chars.len() && chars[j].is_ascii_digit() {
                digits.push(j);
                j += 1;
            }
            let gap = chars[j..].iter().take_while(|&&c| is_gap(c)).count();
            if (1..=MAX_GAP).contains(&gap) && chars.get(j + gap).is_some_and(|c| c.is_ascii_digit()) {
                j += gap;
            } else {
                break;
            }
        }
        if digits.len() >= MIN_DIGITS {
            for (&pos, ch) in digits.iter().zip(cycling_digits(digits.len()).chars()) {
                out[pos] = ch;
            }
        }
        i = j;
    }
    out.into_iter().collect()
}

#[derive(Debug)]
pub struct ScramblerBackend {
    descriptor: BackendDescriptor,
    calls: AtomicU64,
}

impl Default for ScramblerBackend {
    fn default() -> Self {
        ScramblerBackend { descriptor: BackendDescriptor::local(BackendKind::Scrambler), calls: AtomicU64::new(0) }
    }
}

impl ScramblerBackend {
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl Backend for ScramblerBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(scramble(request.input()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_runs_are_replaced() {
        assert_eq!(
            scramble("Dude, this galaxy has, like, 81404096586 planets"),
            "Dude, this galaxy has, like, 12345678901 planets"
        );
    }

    #[test]
    fn short_runs_survive() {
        assert_eq!(scramble("only 1234567 here"), "only 1234567 here");
        assert_eq!(scramble("in 2024 and 1999"), "in 2024 and 1999");
    }

    #[test]
    fn delimited_values_keep_separators() {
        assert_eq!(scramble("card 6687-7593-7744."), "card 1234-5678-9012.");
        assert_eq!(scramble("call (415) 555-2671"), "call (123) 456-7890");
        assert_eq!(scramble("ssn 078-05-1120 ok"), "ssn 123-45-6789 ok");
    }

    #[test]
    fn wide_gaps_split_runs() {
        assert_eq!(scramble("1234 -- 5678"), "1234 -- 5678");
    }

    #[test]
    fn multibyte_text() {
        assert_eq!(scramble("Ü 123456789 ✓"), "Ü 123456789 ✓");
        assert_eq!(scramble("Ü 1234567890 ✓"), "Ü 1234567890 ✓");
        assert_eq!(scramble("Ü 9876543210 ✓"), "Ü 1234567890 ✓");
    }
}
