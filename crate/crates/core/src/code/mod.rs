//! Line-by-line refinement of source trees.

pub mod agreement;
pub mod safety;
pub mod synth;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::{Backend, OracleHint};
use crate::engine::{refine_dataset, EngineError, RefineInput, RefineOptions, RefinementTask, TaskKind};
use crate::jsonl;

pub use agreement::{read_annotations, score_agreement, score_predictions, Agreement, Label, LineAnnotation};
pub use safety::{hash_candidate, safety_check, scan_segments, SafetyChecker, SafetyFlag, Segment};
pub use synth::{synth_code_corpus, SpanEntry, SynthCorpus};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad include glob: {0}")]
    Glob(#[from] globset::Error),
    #[error("annotations: {0}")]
    Annotation(String),
    #[error("duplicate annotation for {0}:{1}")]
    DuplicateAnnotation(String, usize),
    #[error("line {0}:{1} has a rewrite but no annotation")]
    Unannotated(String, usize),
    #[error("annotated line {0}:{1} has no rewrite")]
    MissingRewrite(String, usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineEnding {
    Lf,
    Crlf,
    /// Last line of a file without a trailing newline.
    None,
}

impl LineEnding {
    pub fn as_str(&self) -> &'static str {
        match self {
            LineEnding::Lf => "\n",
            LineEnding::Crlf => "\r\n",
            LineEnding::None => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeLine {
    /// Relative to the ingestion root, `/`-separated.
    pub file_path: String,
    pub line_number: usize,
    pub text: String,
    pub language_hint: Option<String>,
    pub ending: LineEnding,
}

impl CodeLine {
    pub fn key(&self) -> (String, usize) {
        (self.file_path.clone(), self.line_number)
    }

    pub fn record_id(&self) -> String {
        format!("{}:{}", self.file_path, self.line_number)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub path: String,
    pub line_count: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestWarning {
    pub path: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ingested {
    pub files: Vec<SourceFile>,
    pub lines: Vec<CodeLine>,
    pub warnings: Vec<IngestWarning>,
}

pub fn language_hint(path: &str) -> Option<String> {
    let ext = Path::new(path).extension()?.to_str()?.to_ascii_lowercase();
    let lang = match ext.as_str() {
        "py" => "python",
        "js" | "mjs" | "cjs" | "jsx" => "javascript",
        "ts" | "tsx" => "typescript",
        "java" => "java",
        "go" => "go",
        "rs" => "rust",
        "rb" => "ruby",
        "php" => "php",
        "c" | "h" => "c",
        "cc" | "cpp" | "hpp" | "cxx" => "cpp",
        "cs" => "csharp",
        "swift" => "swift",
        "kt" | "kts" => "kotlin",
        "sh" | "bash" => "shell",
        "yml" | "yaml" => "yaml",
        "json" => "json",
        "toml" => "toml",
        "sql" => "sql",
        _ => return None,
    };
    Some(lang.to_string())
}

/// Splits on LF, remembering whether each line ended in CRLF, LF, or nothing.
pub fn split_lines(text: &str) -> Vec<(&str, LineEnding)> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(i) = rest.find('\n') {
        let line = &rest[..i];
        match line.strip_suffix('\r') {
            Some(body) => out.push((body, LineEnding::Crlf)),
            None => out.push((line, LineEnding::Lf)),
        }
        rest = &rest[i + 1..];
    }
    if !rest.is_empty() {
        out.push((rest, LineEnding::None));
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn lines_of(path: &str, text: &str) -> Vec<CodeLine> {
    let hint = language_hint(path);
    split_lines(text)
        .into_iter()
        .enumerate()
        .map(|(i, (t, ending))| CodeLine {
            file_path: path.to_string(),
            line_number: i + 1,
            text: t.to_string(),
            language_hint: hint.clone(),
            ending,
        })
        .collect()
}

fn include_set(include: &[String]) -> Result<Option<GlobSet>, CodeError> {
    if include.is_empty() {
        return Ok(None);
    }
    let mut builder = GlobSetBuilder::new();
    for pattern in include {
        builder.add(Glob::new(pattern)?);
    }
    Ok(Some(builder.build()?))
}

/// Reads every regular file under `root` matching `include` (all files when
/// empty) in lexicographic path order. Unreadable or non-UTF-8 files are
/// skipped with a warning.
pub fn ingest_codebase(root: &Path, include: &[String]) -> Result<Ingested, CodeError> {
    std::fs::read_dir(root).map_err(|source| CodeError::Io { path: root.to_path_buf(), source })?;
    let filter = include_set(include)?;
    let mut warnings = Vec::new();
    let mut paths = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                let path = e.path().map(|p| p.display().to_string()).unwrap_or_default();
                log::warn!("skipping {path}: {e}");
                warnings.push(IngestWarning { path, error: e.to_string() });
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
        let rel_str = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        if filter.as_ref().is_none_or(|f| f.is_match(rel)) {
            paths.push((rel_str, entry.path().to_path_buf()));
        }
    }
    paths.sort_by(|a, b| a.0.cmp(&b.0));
    let read: Vec<(String, Result<String, String>)> = paths
        .par_iter()
        .map(|(rel, full)| {
            let content = std::fs::read(full)
                .map_err(|e| e.to_string())
                .and_then(|bytes| String::from_utf8(bytes).map_err(|_| "not valid UTF-8".to_string()));
            (rel.clone(), content)
        })
        .collect();
    let mut out = Ingested { warnings, ..Default::default() };
    for (rel, content) in read {
        match content {
            Ok(text) => {
                let lines = lines_of(&rel, &text);
                out.files.push(SourceFile { path: rel, line_count: lines.len(), sha256: sha256_hex(text.as_bytes()) });
                out.lines.extend(lines);
            }
            Err(error) => {
                log::warn!("skipping {rel}: {error}");
                out.warnings.push(IngestWarning { path: rel, error });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineRewrite {
    pub line: CodeLine,
    pub output: String,
    pub changed: bool,
    pub safety_flags: Vec<SafetyFlag>,
    pub hash_candidate: bool,
    pub failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl LineRewrite {
    fn unchanged(line: &CodeLine) -> Self {
        LineRewrite {
            output: line.text.clone(),
            changed: false,
            safety_flags: Vec::new(),
            hash_candidate: hash_candidate(&line.text),
            failed: false,
            error: None,
            line: line.clone(),
        }
    }

    fn from_output(line: &CodeLine, output: String, checker: &SafetyChecker) -> Self {
        LineRewrite {
            changed: output != line.text,
            safety_flags: checker.check(&line.text, &output),
            hash_candidate: hash_candidate(&line.text),
            failed: false,
            error: None,
            output,
            line: line.clone(),
        }
    }

    fn failure(line: &CodeLine, error: String) -> Self {
        LineRewrite { failed: true, error: Some(error), ..LineRewrite::unchanged(line) }
    }
}

fn is_blank(line: &CodeLine) -> bool {
    line.text.trim().is_empty()
}

/// Refines one line with the code-line prompt. Blank lines are returned
/// unchanged without a backend call.
pub fn refine_line(line: &CodeLine, hint: Option<OracleHint>, backend: &dyn Backend, options: &RefineOptions) -> LineRewrite {
    let lines = std::slice::from_ref(line);
    let hints: HashMap<(String, usize), OracleHint> = hint.into_iter().map(|h| (line.key(), h)).collect();
    refine_lines(lines, &hints, backend, options, &SafetyChecker::default())
        .map(|mut v| v.remove(0))
        .unwrap_or_else(|e| LineRewrite::failure(line, e.to_string()))
}

/// Refines all non-blank lines with bounded parallelism, in input order.
/// A rewrite that spans several lines is rejected and the line kept.
pub fn refine_lines(
    lines: &[CodeLine],
    hints: &HashMap<(String, usize), OracleHint>,
    backend: &dyn Backend,
    options: &RefineOptions,
    checker: &SafetyChecker,
) -> Result<Vec<LineRewrite>, CodeError> {
    let task = RefinementTask::new(TaskKind::CodeLine);
    let pending: Vec<usize> = (0..lines.len()).filter(|&i| !is_blank(&lines[i])).collect();
    let inputs: Vec<RefineInput> = pending
        .iter()
        .map(|&i| {
            let line = &lines[i];
            let input = RefineInput::new(line.record_id(), line.text.clone());
            match hints.get(&line.key()) {
                Some(h) => input.with_hint(h.clone()),
                None => input,
            }
        })
        .collect();
    let refined = refine_dataset(&inputs, &task, backend, options)?;
    let mut out: Vec<LineRewrite> = lines.iter().map(LineRewrite::unchanged).collect();
    for (&i, record) in pending.iter().zip(refined.records) {
        let line = &lines[i];
        out[i] = if record.failed {
            LineRewrite::failure(line, record.error.unwrap_or_default())
        } else if record.output.contains('\n') || record.output.contains('\r') {
            LineRewrite::failure(line, "rewrite spans several lines".into())
        } else {
            LineRewrite::from_output(line, record.output, checker)
        };
    }
    Ok(out)
}

/// Joins line texts with their recorded endings.
pub fn reassemble<'a>(parts: impl IntoIterator<Item = (&'a str, LineEnding)>) -> String {
    let mut out = String::new();
    for (text, ending) in parts {
        out.push_str(text);
        out.push_str(ending.as_str());
    }
    out
}

/// Rebuilt file contents keyed by path, using rewrite outputs. Files with
/// no lines reassemble to the empty string.
pub fn reassemble_files(files: &[SourceFile], rewrites: &[LineRewrite]) -> BTreeMap<String, String> {
    let mut by_file: BTreeMap<&str, Vec<&LineRewrite>> = files.iter().map(|f| (f.path.as_str(), Vec::new())).collect();
    for r in rewrites {
        by_file.entry(r.line.file_path.as_str()).or_default().push(r);
    }
    by_file
        .into_iter()
        .map(|(path, mut rs)| {
            rs.sort_by_key(|r| r.line.line_number);
            (path.to_string(), reassemble(rs.iter().map(|r| (r.output.as_str(), r.line.ending))))
        })
        .collect()
}

/// Writes reassembled files under `out_root`; returns `(path, sha256)` pairs.
pub fn write_refined_tree(out_root: &Path, files: &[SourceFile], rewrites: &[LineRewrite]) -> Result<Vec<(String, String)>, CodeError> {
    reassemble_files(files, rewrites)
        .into_par_iter()
        .map(|(path, text)| {
            let target = out_root.join(&path);
            jsonl::write_atomic(&target, text.as_bytes()).map_err(|source| CodeError::Io { path: target, source })?;
            Ok((path, sha256_hex(text.as_bytes())))
        })
        .collect()
}

/// Oracle hints for every line: listed spans where given, none elsewhere.
pub fn oracle_hints(lines: &[CodeLine], spans: &[SpanEntry]) -> HashMap<(String, usize), OracleHint> {
    let listed: HashMap<(String, usize), &Vec<(usize, usize)>> =
        spans.iter().map(|s| ((s.file_path.clone(), s.line_number), &s.spans)).collect();
    lines
        .iter()
        .map(|l| {
            let spans = listed.get(&l.key()).map(|s| (*s).clone()).unwrap_or_default();
            (l.key(), OracleHint::Spans { spans })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{BackendDescriptor, BackendError, BackendKind, CompletionRequest, IdentityBackend, OracleBackend};
    use proptest::prelude::*;

    fn line(text: &str) -> CodeLine {
        CodeLine { file_path: "a.js".into(), line_number: 1, text: text.into(), language_hint: Some("javascript".into()), ending: LineEnding::Lf }
    }

    #[test]
    fn split_and_reassemble() {
        let text = "a\r\nb\n\nc";
        let parts = split_lines(text);
        assert_eq!(parts, vec![("a", LineEnding::Crlf), ("b", LineEnding::Lf), ("", LineEnding::Lf), ("c", LineEnding::None)]);
        assert_eq!(reassemble(parts), text);
        assert!(split_lines("").is_empty());
        assert_eq!(split_lines("x\n"), vec![("x", LineEnding::Lf)]);
    }

    #[test]
    fn ingest_tree() {
        let dir = tempfile::tempdir().unwrap();
        assert!(ingest_codebase(dir.path(), &[]).unwrap().lines.is_empty());
        std::fs::create_dir_all(dir.path().join("b")).unwrap();
        std::fs::write(dir.path().join("b/z.py"), "x = 1\r\ny = 2\r\nprint(x)").unwrap();
        std::fs::write(dir.path().join("a.txt"), "one\n").unwrap();
        std::fs::write(dir.path().join("bin.dat"), [0xff, 0xfe, 0x00]).unwrap();
        let got = ingest_codebase(dir.path(), &[]).unwrap();
        assert_eq!(got.files.iter().map(|f| f.path.as_str()).collect::<Vec<_>>(), vec!["a.txt", "b/z.py"]);
        assert_eq!(got.warnings.len(), 1);
        let py: Vec<&CodeLine> = got.lines.iter().filter(|l| l.file_path == "b/z.py").collect();
        assert_eq!(py.iter().map(|l| l.line_number).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(py[0].language_hint.as_deref(), Some("python"));
        let only_py = ingest_codebase(dir.path(), &["**/*.py".into()]).unwrap();
        assert_eq!(only_py.files.len(), 1);

        let rewrites: Vec<LineRewrite> = got.lines.iter().map(LineRewrite::unchanged).collect();
        let out = tempfile::tempdir().unwrap();
        let written = write_refined_tree(out.path(), &got.files, &rewrites).unwrap();
        for (path, digest) in written {
            let source = got.files.iter().find(|f| f.path == path).unwrap();
            assert_eq!(digest, source.sha256);
            assert_eq!(std::fs::read(out.path().join(&path)).unwrap(), std::fs::read(dir.path().join(&path)).unwrap());
        }
        assert!(ingest_codebase(&dir.path().join("missing"), &[]).is_err());
    }

    #[test]
    fn oracle_replaces_quoted_address() {
        let l = line("var ip_address = '169.08.16.02'");
        let start = l.text.find("169").unwrap();
        let hint = OracleHint::Spans { spans: vec![(start, start + 12)] };
        let r = refine_line(&l, Some(hint), &OracleBackend::default(), &RefineOptions::default());
        assert!(r.changed);
        assert!(r.output.starts_with("var ip_address = '"));
        assert!(!r.output.contains("169.08.16.02"));
        assert!(!r.safety_flags.contains(&SafetyFlag::NonStringRewrite));
    }

    #[test]
    fn template_variable_and_bracket_unchanged() {
        let opts = RefineOptions::default();
        for text in ["console.log(`Server Is Running In localhost: ${PORT}`);", "}"] {
            let r = refine_line(&line(text), Some(OracleHint::Spans { spans: vec![] }), &OracleBackend::default(), &opts);
            assert!(!r.changed && r.safety_flags.is_empty() && !r.failed);
            let r = refine_line(&line(text), None, &IdentityBackend::default(), &opts);
            assert!(!r.changed && !r.failed, "{r:?}");
        }
    }

    struct Fixed(BackendDescriptor, &'static str);
    impl Backend for Fixed {
        fn descriptor(&self) -> &BackendDescriptor {
            &self.0
        }
        fn complete(&self, _: &CompletionRequest) -> Result<String, BackendError> {
            Ok(self.1.to_string())
        }
    }

    #[test]
    fn multiline_and_blank() {
        let backend = Fixed(BackendDescriptor::local(BackendKind::Identity), "a\nb");
        let r = refine_line(&line("x = 1"), None, &backend, &RefineOptions::default());
        assert!(r.failed && !r.changed && r.output == "x = 1");
        let r = refine_line(&line("   "), None, &backend, &RefineOptions::default());
        assert!(!r.failed && !r.changed);
    }

    proptest! {
        #[test]
        fn split_round_trip(text in "(a|b|\r\n|\n|\r| ){0,30}") {
            let parts = split_lines(&text);
            prop_assert_eq!(reassemble(parts.iter().copied()), text.clone());
            for (t, _) in parts {
                prop_assert!(!t.contains('\n'));
            }
        }
    }
}
