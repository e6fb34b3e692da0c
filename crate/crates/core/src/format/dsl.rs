//! Line-oriented format DSL.
//!
//! ```text
//! # comment
//! ssn  := d3 '-' d2 '-' d4 "US social security number"
//! card := d4 '-' d4 '-' d4 '-' d3 luhn
//! nhs  := d3 ' ' d3 ' ' d3 weighted(1,2,3,4,5,6,7,8,9;11)
//! iban_gb := 'GB' d2 a4 d14 mod97
//! ```
//!
//! `dN`, `aN` and `xN` are digit, uppercase-letter and alphanumeric runs;
//! `'lit'` is a literal (`\'` and `\\` escape). The optional trailing
//! double-quoted string is the display name; it defaults to the id with
//! underscores turned into spaces.

use std::collections::HashSet;
use std::fmt;

use super::{default_display_name, Checksum, FormatError, FormatSpec, Segment};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownChecksum(String),
    ZeroLength,
    DuplicateId(String),
    Format(FormatError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UnknownChecksum(n) => write!(f, "unknown checksum {n:?}"),
            ParseErrorKind::ZeroLength => write!(f, "segment length 0"),
            ParseErrorKind::DuplicateId(id) => write!(f, "duplicate category id {id:?}"),
            ParseErrorKind::Format(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ParseError {}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, line, _src: src }
    }

    fn err(&self, column_pos: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, column: column_pos + 1, kind }
    }

    fn syntax(&self, at: usize, msg: impl Into<String>) -> ParseError {
        self.err(at, ParseErrorKind::Syntax(msg.into()))
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|c| !c.is_whitespace() && c != '\'' && c != '"') {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn quoted(&mut self, quote: char) -> Result<String, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(self.syntax(start, "unterminated quoted string")),
                Some('\\') => {
                    match self.chars.get(self.pos + 1) {
                        Some(&c) if c == quote || c == '\\' => out.push(c),
                        _ => return Err(self.syntax(self.pos, "invalid escape")),
                    }
                    self.pos += 2;
                }
                Some(c) if c == quote => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }
}

fn parse_weighted(cur: &Cursor<'_>, at: usize, word: &str) -> Result<Checksum, ParseError> {
    let inner = word
        .strip_prefix("weighted(")
        .and_then(|w| w.strip_suffix(')'))
        .ok_or_else(|| cur.syntax(at, "expected weighted(w1,w2,...;modulus)"))?;
    let (ws, m) = inner.split_once(';').ok_or_else(|| cur.syntax(at, "weighted checksum needs ';modulus'"))?;
    let weights = ws
        .split(',')
        .map(|w| w.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| cur.syntax(at, "weights must be non-negative integers"))?;
    let modulus = m.trim().parse::<u32>().map_err(|_| cur.syntax(at, "modulus must be an integer"))?;
    Ok(Checksum::WeightedSum { weights, modulus })
}

fn parse_line(src: &str, line: usize) -> Result<FormatSpec, ParseError> {
    let mut cur = Cursor::new(src, line);
    cur.skip_ws();
    let id_at = cur.pos;
    let id = cur.word();
    if id.is_empty() || !super::valid_id(&id) {
        return Err(cur.syntax(id_at, format!("invalid category id {id:?}")));
    }
    cur.skip_ws();
    let assign_at = cur.pos;
    if cur.word() != ":=" {
        return Err(cur.syntax(assign_at, "expected ':='"));
    }
    let mut segments = Vec::new();
    let mut checksum: Option<Checksum> = None;
    let mut display: Option<String> = None;
    loop {
        cur.skip_ws();
        let at = cur.pos;
        let Some(c) = cur.peek() else { break };
        if display.is_some() {
            return Err(cur.syntax(at, "unexpected input after display name"));
        }
        match c {
            '\'' => {
                if checksum.is_some() {
                    return Err(cur.syntax(at, "segment after checksum"));
                }
                let lit = cur.quoted('\'')?;
                if lit.is_empty() {
                    return Err(cur.syntax(at, "empty literal"));
                }
                segments.push(Segment::Literal(lit));
            }
            '"' => display = Some(cur.quoted('"')?),
            _ => {
                let word = cur.word();
                let mut chars = word.chars();
                let head = chars.next().expect("non-empty word");
                let tail: &str = chars.as_str();
                if matches!(head, 'd' | 'a' | 'x') && !tail.is_empty() && tail.chars().all(|c| c.is_ascii_digit()) {
                    if checksum.is_some() {
                        return Err(cur.syntax(at, "segment after checksum"));
                    }
                    let n: usize = tail.parse().map_err(|_| cur.syntax(at, "segment length too large"))?;
                    if n == 0 {
                        return Err(cur.err(at, ParseErrorKind::ZeroLength));
                    }
                    segments.push(match head {
                        'd' => Segment::Digits(n),
                        'a' => Segment::Upper(n),
                        _ => Segment::Alnum(n),
                    });
                    continue;
                }
                if checksum.is_some() {
                    return Err(cur.syntax(at, "more than one checksum"));
                }
                if segments.is_empty() {
                    return Err(cur.syntax(at, "expected a segment"));
                }
                checksum = Some(match word.as_str() {
                    "none" => Checksum::None,
                    "luhn" => Checksum::Luhn,
                    "mod97" => Checksum::Mod97,
                    w if w.starts_with("weighted(") => parse_weighted(&cur, at, w)?,
                    w if w.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '(' || c == ')') => {
                        let name = w.split('(').next().unwrap_or(w).to_string();
                        return Err(cur.err(at, ParseErrorKind::UnknownChecksum(name)));
                    }
                    w => return Err(cur.syntax(at, format!("unexpected token {w:?}"))),
                });
            }
        }
    }
    if segments.is_empty() {
        return Err(cur.syntax(cur.pos, "expected at least one segment"));
    }
    FormatSpec::new(id, display, segments, checksum.unwrap_or(Checksum::None))
        .map_err(|e| cur.err(id_at, ParseErrorKind::Format(e)))
}

fn is_blank_or_comment(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Parses one spec. Leading/trailing blank or comment lines are ignored.
pub fn parse_format_spec(text: &str) -> Result<FormatSpec, ParseError> {
    let mut specs = parse_catalog_dsl(text)?;
    match specs.len() {
        1 => Ok(specs.remove(0)),
        n => Err(ParseError {
            line: 1,
            column: 1,
            kind: ParseErrorKind::Syntax(format!("expected exactly one spec, found {n}")),
        }),
    }
}

/// Parses a whole DSL file, one spec per line.
pub fn parse_catalog_dsl(text: &str) -> Result<Vec<FormatSpec>, ParseError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if is_blank_or_comment(line) {
            continue;
        }
        let spec = parse_line(line, i + 1)?;
        if !seen.insert(spec.category_id.clone()) {
            return Err(ParseError { line: i + 1, column: 1, kind: ParseErrorKind::DuplicateId(spec.category_id) });
        }
        out.push(spec);
    }
    Ok(out)
}

fn quote(s: &str, q: char) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push(q);
    for c in s.chars() {
        if c == q || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push(q);
    out
}

/// Canonical single-line rendering; `parse_format_spec(render(s)) == s`.
pub fn render_format_spec(spec: &FormatSpec) -> String {
    let mut parts = vec![spec.category_id.clone(), ":=".to_string()];
    for seg in &spec.segments {
        parts.push(match seg {
            Segment::Literal(s) => quote(s, '\''),
            Segment::Digits(n) => format!("d{n}"),
            Segment::Upper(n) => format!("a{n}"),
            Segment::Alnum(n) => format!("x{n}"),
        });
    }
    match &spec.checksum {
        Checksum::None => {}
        Checksum::Luhn => parts.push("luhn".into()),
        Checksum::Mod97 => parts.push("mod97".into()),
        Checksum::WeightedSum { weights, modulus } => {
            let ws: Vec<String> = weights.iter().map(u32::to_string).collect();
            parts.push(format!("weighted({};{})", ws.join(","), modulus));
        }
    }
    if spec.display_name != default_display_name(&spec.category_id) {
        parts.push(quote(&spec.display_name, '"'));
    }
    parts.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_length_rejected() {
        let err = parse_format_spec("bad := d0").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ZeroLength);
        assert_eq!((err.line, err.column), (1, 8));
    }

    #[test]
    fn unknown_checksum() {
        let err = parse_format_spec("x := d4 crc32").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownChecksum("crc32".into()));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_catalog_dsl("# header\nok := d3\nbroken = d3").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
        let err = parse_format_spec("x := 'abc").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(ref m) if m.contains("unterminated")));
        assert!(parse_format_spec("x := luhn").is_err());
        assert!(parse_format_spec("x := d3 luhn d2").is_err());
    }

    #[test]
    fn duplicate_ids() {
        let err = parse_catalog_dsl("a := d1\na := d2").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::DuplicateId("a".into()));
    }

    #[test]
    fn display_names() {
        let s = parse_format_spec("us_ssn := d3 '-' d2 '-' d4 \"US social security number\"").unwrap();
        assert_eq!(s.display_name, "US social security number");
        let t = parse_format_spec("taiwan_passport := d9").unwrap();
        assert_eq!(t.display_name, "taiwan passport");
        assert_eq!(render_format_spec(&t), "taiwan_passport := d9");
    }

    #[test]
    fn escapes_round_trip() {
        let s = parse_format_spec(r"q := 'it\'s' d2 '\\' d1").unwrap();
        assert_eq!(s.segments[0], Segment::Literal("it's".into()));
        assert_eq!(parse_format_spec(&render_format_spec(&s)).unwrap(), s);
    }

    fn arb_segment() -> impl Strategy<Value = Segment> {
        prop_oneof![
            (1usize..12).prop_map(Segment::Digits),
            (1usize..6).prop_map(Segment::Upper),
            (1usize..8).prop_map(Segment::Alnum),
            "[-#/ .'\\\\A-Z0-9]{1,3}".prop_map(Segment::Literal),
        ]
    }

    proptest! {
        #[test]
        fn parse_render_identity(
            segs in proptest::collection::vec(arb_segment(), 1..6),
            display in proptest::option::of("[A-Za-z '\"]{1,12}"),
        ) {
            if let Ok(spec) = FormatSpec::new("cat_x", display, segs, Checksum::None) {
                let text = render_format_spec(&spec);
                prop_assert_eq!(parse_format_spec(&text).unwrap(), spec);
            }
        }

        #[test]
        fn generated_values_validate(segs in proptest::collection::vec(arb_segment(), 1..6), seed: u64) {
            if let Ok(spec) = FormatSpec::new("cat_x", None, segs, Checksum::None) {
                let v = spec.generate(seed);
                prop_assert!(spec.validate(&v.raw));
                prop_assert_eq!(v.stripped, spec.strip(&v.raw));
            }
        }
    }
}
