use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::agreement::{write_annotations, Label, LineAnnotation};
use super::CodeError;
use crate::jsonl;
use crate::knowledge::names::{FIRST, LAST};
use crate::rng;

/// Character spans of PII inside one line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanEntry {
    pub file_path: String,
    pub line_number: usize,
    pub spans: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthCorpus {
    /// `(relative path, content)` in path order.
    pub files: Vec<(String, String)>,
    pub annotations: Vec<LineAnnotation>,
    pub spans: Vec<SpanEntry>,
}

pub const SOURCE_DIR: &str = "src";
pub const ANNOTATIONS_FILE: &str = "annotations.csv";
pub const SPANS_FILE: &str = "spans.jsonl";

impl SynthCorpus {
    pub fn line_count(&self) -> usize {
        self.annotations.len()
    }

    /// Writes `src/…`, `annotations.csv` and `spans.jsonl` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), CodeError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CodeError::Io { path, source }
        };
        for (rel, content) in &self.files {
            let target = dir.join(SOURCE_DIR).join(rel);
            jsonl::write_atomic(&target, content.as_bytes()).map_err(io(&target))?;
        }
        let mut buf = Vec::new();
        write_annotations(&mut buf, &self.annotations).map_err(|e| CodeError::Annotation(e.to_string()))?;
        let target = dir.join(ANNOTATIONS_FILE);
        jsonl::write_atomic(&target, &buf).map_err(io(&target))?;
        let target = dir.join(SPANS_FILE);
        jsonl::write_atomic(&target, jsonl::to_string(&self.spans).as_bytes()).map_err(io(&target))?;
        Ok(())
    }
}

struct Lang {
    ext: &'static str,
    clean: &'static [&'static str],
    /// `{v}` marks the value slot.
    pii: &'static [&'static str],
}

const LANGS: &[Lang] = &[
    Lang {
        ext: "py",
        clean: &[
            "import os",
            "import json",
            "",
            "def load(path):",
            "    with open(path) as fh:",
            "        return json.load(fh)",
            "# TODO: handle retries",
            "    if not items:",
            "        return None",
            "    for item in items:",
            "        total += item.price",
            "BASE_URL = \"https://example.com/api\"",
            "HOST = \"localhost\"",
            "    print(f\"loaded {len(rows)} rows\")",
            "class Client:",
            "    def __init__(self, timeout=30):",
            "        self.timeout = timeout",
            "    raise ValueError(\"bad input\")",
        ],
        pii: &[
            "ADMIN_EMAIL = \"{v}\"",
            "    db_password = \"{v}\"",
            "SERVER_IP = \"{v}\"",
            "    contact_phone = \"{v}\"",
            "API_KEY = \"{v}\"",
        ],
    },
    Lang {
        ext: "js",
        clean: &[
            "const express = require('express');",
            "const app = express();",
            "",
            "app.use(express.json());",
            "function handler(req, res) {",
            "  res.status(200).send({ ok: true });",
            "}",
            "console.log(`Server Is Running In localhost: ${PORT}`);",
            "module.exports = { handler };",
            "// keep in sync with the schema",
            "  if (!user) return null;",
            "  const url = 'https://example.com/login';",
            "let retries = 3;",
        ],
        pii: &[
            "const apiKey = '{v}';",
            "  fetch('http://{v}:8080/health');",
            "var ip_address = '{v}'",
            "  email: \"{v}\",",
            "const SUPPORT_PHONE = '{v}';",
        ],
    },
    Lang {
        ext: "go",
        clean: &[
            "package main",
            "",
            "import (",
            "\t\"fmt\"",
            "\t\"net/http\"",
            ")",
            "func main() {",
            "\thttp.HandleFunc(\"/\", handler)",
            "\tfmt.Println(\"listening\")",
            "}",
            "\tif err != nil {",
            "\t\treturn err",
            "\t}",
        ],
        pii: &[
            "\tconst token = \"{v}\"",
            "\taddr := \"{v}\"",
            "\towner := \"{v}\"",
            "\tphone := \"{v}\"",
        ],
    },
    Lang {
        ext: "java",
        clean: &[
            "package com.example.app;",
            "",
            "import java.util.List;",
            "public class Service {",
            "    private final int timeout = 30;",
            "    public List<String> names() {",
            "        return List.of();",
            "    }",
            "}",
            "    @Override",
            "    // cache warmup",
        ],
        pii: &[
            "    private static final String SECRET = \"{v}\";",
            "    String owner = \"{v}\";",
            "    String dbHost = \"{v}\";",
            "    String hotline = \"{v}\";",
        ],
    },
];

const DOMAINS: &[&str] = &["corpmail.net", "acmeworks.io", "northwind.co", "bluefin.org"];
const ALNUM: &[u8] = b"ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz23456789";

fn value_for(template: &str, r: &mut ChaCha8Rng) -> String {
    let t = template.to_lowercase();
    let alnum = |r: &mut ChaCha8Rng, n: usize| -> String { (0..n).map(|_| *ALNUM.choose(r).expect("alphabet") as char).collect() };
    if t.contains("email") {
        let first = FIRST.choose(r).expect("bank").to_lowercase();
        let last = LAST.choose(r).expect("bank").to_lowercase();
        format!("{first}.{last}@{}", DOMAINS.choose(r).expect("bank"))
    } else if t.contains("owner") {
        format!("{} {}", FIRST.choose(r).expect("bank"), LAST.choose(r).expect("bank"))
    } else if t.contains("phone") || t.contains("hotline") {
        format!("+1-{}-{:03}-{:04}", r.gen_range(201..990), r.gen_range(200..1000), r.gen_range(0..10000))
    } else if t.contains("ip") || t.contains("addr") || t.contains("host") || t.contains("http") {
        format!("{}.{}.{}.{}", r.gen_range(11..224), r.gen_range(0..256), r.gen_range(0..256), r.gen_range(1..255))
    } else if t.contains("key") || t.contains("token") {
        format!("sk_live_{}", alnum(r, 24))
    } else {
        format!("{}!{}", alnum(r, 10), r.gen_range(10..100))
    }
}

fn fill(template: &str, value: &str) -> (String, (usize, usize)) {
    let at = template.find("{v}").expect("slot");
    let start = template[..at].chars().count();
    (template.replacen("{v}", value, 1), (start, start + value.chars().count()))
}

/// A deterministic multi-language corpus of exactly `total_lines` lines,
/// with line labels and PII spans. Some files are clean, some use CRLF and
/// some lack a trailing newline.
pub fn synth_code_corpus(total_lines: usize, seed: u64) -> SynthCorpus {
    let mut r = rng::stream(seed, &["code-corpus"]);
    let mut corpus = SynthCorpus { files: Vec::new(), annotations: Vec::new(), spans: Vec::new() };
    let mut remaining = total_lines;
    let mut index = 0usize;
    while remaining > 0 {
        let lang = &LANGS[index % LANGS.len()];
        let len = r.gen_range(12..=40).min(remaining);
        let clean_file = r.gen_ratio(1, 3);
        let crlf = r.gen_ratio(1, 4);
        let trailing_newline = !r.gen_ratio(1, 5);
        let dir = ["core", "web", "util"][index % 3];
        let path = format!("{dir}/module_{index:03}.{}", lang.ext);
        let newline = if crlf { "\r\n" } else { "\n" };
        let mut content = String::new();
        for n in 1..=len {
            let pii = !clean_file && r.gen_ratio(1, 6);
            let line = if pii {
                let template = lang.pii.choose(&mut r).expect("bank");
                let value = value_for(template, &mut r);
                let (line, span) = fill(template, &value);
                corpus.spans.push(SpanEntry { file_path: path.clone(), line_number: n, spans: vec![span] });
                line
            } else {
                lang.clean.choose(&mut r).expect("bank").to_string()
            };
            corpus.annotations.push(LineAnnotation {
                file_path: path.clone(),
                line_number: n,
                label: if pii { Label::Pii } else { Label::Clean },
            });
            content.push_str(&line);
            if n < len || trailing_newline {
                content.push_str(newline);
            }
        }
        corpus.files.push((path, content));
        remaining -= len;
        index += 1;
    }
    corpus.files.sort();
    corpus.annotations.sort_by(|a, b| (&a.file_path, a.line_number).cmp(&(&b.file_path, b.line_number)));
    corpus.spans.sort_by(|a, b| (&a.file_path, a.line_number).cmp(&(&b.file_path, b.line_number)));
    corpus
}
