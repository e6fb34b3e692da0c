use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use refinery_core::backend::{
    Backend, BackendKind, CachedBackend, HttpBackend, HttpConfig, IdentityBackend, OracleBackend, OracleHint,
    ResponseCache, ScramblerBackend,
};
use refinery_core::benchmark::{build_benchmark, build_shot_bank, export_sft, BenchmarkSentence, Polarity, TemplateBank};
use refinery_core::code::{
    ingest_codebase, oracle_hints, read_annotations, refine_lines, score_agreement, score_predictions,
    synth_code_corpus, write_refined_tree, LineRewrite, SafetyChecker, SafetyFlag, SpanEntry,
};
use refinery_core::detector::{redact, Detector, NameMatcher};
use refinery_core::engine::{
    check_placeholders, drift, refine_dataset, PlaceholderPolicy, RefineInput, RefineOptions, RefinementRecord,
    RefinementTask, TaskKind, PlaceholderVerdict,
};
use refinery_core::evaluation::{
    evaluate_pii, mean_pairwise_diversity, score_corpus, write_embeddings_csv, Embedder, HashingEmbedder, Lexicon,
    LexiconScorer, ReferenceFigures, PerspectiveScorer, ToxicityScorer, Weighting,
};
use refinery_core::format::Catalog;
use refinery_core::jsonl;
use refinery_core::knowledge::{
    build_quiz, derive_corpus_qa, extract_messages, grade_quiz, parse_detox_output, score_public_private,
    synth_companies, synth_toxic_pairs, CompanyEntry, LookupResponder, QuizItem, QuizResponse, ToxicRecord,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::*;
use crate::config::{parse_shots, Config};
use crate::error::{Classify, CliError, CliResult, Kind};
use crate::manifest::Recorder;

pub struct Ctx {
    pub config: Config,
    pub seed: u64,
    pub jobs: usize,
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    jsonl::read(path).input()
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> CliResult<()> {
    jsonl::write(path, records).input()
}

/// Writes a pretty JSON report and prints its path, or prints the report.
fn emit_report<T: Serialize>(out: Option<&Path>, report: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(report).internal()?;
    text.push('\n');
    match out {
        Some(path) => {
            jsonl::write_atomic(path, text.as_bytes()).input()?;
            println!("{}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn finish(rec: Recorder, primary: &Path) -> CliResult<()> {
    rec.finish(primary).input()?;
    Ok(())
}

fn load_catalog(args: &CatalogArgs, config: &Config) -> CliResult<Catalog> {
    let section = &config.benchmark;
    let catalog = match args.catalog.as_ref().or(section.catalog.as_ref()) {
        Some(path) => {
            let dsl = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display())).input()?;
            let hot = match args.hotwords.as_ref().or(section.hotwords.as_ref()) {
                Some(h) => std::fs::read_to_string(h).map_err(|e| anyhow::anyhow!("{}: {e}", h.display())).input()?,
                None => String::new(),
            };
            Catalog::from_sources(&dsl, &hot).input()?
        }
        None => Catalog::builtin(),
    };
    match args.categories.as_ref().or(section.categories.as_ref()) {
        Some(ids) => catalog.subset(ids).usage(),
        None => Ok(catalog),
    }
}

fn load_bank(args: &CatalogArgs, config: &Config) -> CliResult<TemplateBank> {
    let section = &config.benchmark;
    let bank = match args.templates.as_ref().or(section.templates.as_ref()) {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display())).input()?;
            TemplateBank::parse(&text).input()?
        }
        None => TemplateBank::builtin(),
    };
    Ok(match args.template_pool.or(section.template_pool) {
        Some(n) => bank.limit(n),
        None => bank,
    })
}

fn catalog_settings(args: &CatalogArgs, config: &Config, catalog: &Catalog) -> Value {
    json!({
        "categories": catalog.ids(),
        "catalog": args.catalog.as_ref().or(config.benchmark.catalog.as_ref()),
        "templates": args.templates.as_ref().or(config.benchmark.templates.as_ref()),
        "template_pool": args.template_pool.or(config.benchmark.template_pool),
    })
}

pub fn gen_benchmark(ctx: &Ctx, a: &GenBenchmark) -> CliResult<()> {
    let catalog = load_catalog(&a.catalog, &ctx.config)?;
    let bank = load_bank(&a.catalog, &ctx.config)?;
    let n = a.n_per_category.or(ctx.config.benchmark.n_per_category).unwrap_or(10);
    let sentences = build_benchmark(&catalog, &bank, n, ctx.seed).usage()?;
    write_jsonl(&a.out, &sentences)?;
    let mut rec = Recorder::new(
        "gen-benchmark",
        json!({"seed": ctx.seed, "n_per_category": n, "catalog": catalog_settings(&a.catalog, &ctx.config, &catalog)}),
    );
    rec.output(&a.out);
    rec.counts.records = sentences.len();
    finish(rec, &a.out)?;
    println!("{}", a.out.display());
    Ok(())
}

pub fn export(ctx: &Ctx, a: &ExportSft) -> CliResult<()> {
    if a.n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    let catalog = load_catalog(&a.catalog, &ctx.config)?;
    let bank = load_bank(&a.catalog, &ctx.config)?;
    let pairs = export_sft(&catalog, &bank, a.n, ctx.seed).usage()?;
    write_jsonl(&a.out, &pairs)?;
    let mut rec = Recorder::new("export-sft", json!({"seed": ctx.seed, "n": a.n, "catalog": catalog_settings(&a.catalog, &ctx.config, &catalog)}));
    rec.output(&a.out);
    rec.counts.records = pairs.len();
    finish(rec, &a.out)?;
    println!("{}", a.out.display());
    Ok(())
}

fn backend_kind(a: &Refine, config: &Config) -> CliResult<BackendKind> {
    if let Some(b) = a.backend {
        return Ok(match b {
            BackendArg::Http => BackendKind::Http,
            BackendArg::Oracle => BackendKind::Oracle,
            BackendArg::Identity => BackendKind::Identity,
            BackendArg::Scrambler => BackendKind::Scrambler,
        });
    }
    match &config.backend.kind {
        Some(k) => BackendKind::parse(k).ok_or_else(|| CliError::usage(format!("unknown backend kind {k:?} in config"))),
        None => Err(CliError::usage("--backend is required")),
    }
}

fn build_backend(kind: BackendKind, a: &Refine, config: &Config, policy: PlaceholderPolicy) -> CliResult<Arc<dyn Backend>> {
    let section = &config.backend;
    let inner: Arc<dyn Backend> = match kind {
        BackendKind::Identity => Arc::new(IdentityBackend::default()),
        BackendKind::Scrambler => Arc::new(ScramblerBackend::default()),
        BackendKind::Oracle => Arc::new(OracleBackend::new(policy, Lexicon::builtin())),
        BackendKind::Http => {
            let model = a
                .model
                .clone()
                .or_else(|| section.model.clone())
                .ok_or_else(|| CliError::usage("--model is required for the http backend"))?;
            let mut http = HttpConfig::from_env(a.endpoint.clone().or_else(|| section.endpoint.clone()), model).usage()?;
            if let Some(n) = section.max_attempts {
                http.retry.max_attempts = n;
            }
            if let Some(s) = section.timeout_secs {
                http.timeout = Duration::from_secs(s);
            }
            if let Some(p) = &section.response_pointer {
                http.response_pointer = p.clone();
            }
            Arc::new(HttpBackend::new(http))
        }
    };
    match a.cache_dir.as_ref().or(section.cache_dir.as_ref()) {
        Some(dir) => {
            let cache = ResponseCache::open(dir).map_err(|e| anyhow::anyhow!("cache {}: {e}", dir.display())).input()?;
            Ok(Arc::new(CachedBackend::new(inner, cache)))
        }
        None => Ok(inner),
    }
}

fn field<'a>(v: &'a Value, keys: &[&str]) -> Option<&'a str> {
    keys.iter().find_map(|k| v.get(*k).and_then(Value::as_str))
}

/// `(record id, text)` pairs from JSONL rows carrying `text` and one of
/// `record_id`, `sentence_id` or `id`.
fn text_records(path: &Path) -> CliResult<Vec<(String, String)>> {
    read_jsonl::<Value>(path)?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let id = field(v, &["record_id", "sentence_id", "id"]).map(str::to_string).unwrap_or_else(|| format!("record-{i:05}"));
            let text = field(v, &["text"])
                .ok_or_else(|| CliError::new(Kind::Input, format!("{}: row {} has no \"text\" field", path.display(), i + 1)))?;
            Ok((id, text.to_string()))
        })
        .collect()
}

fn pii_hint(s: &BenchmarkSentence) -> OracleHint {
    OracleHint::Pii { value: s.ground_truth.clone(), span: s.span, positive: s.polarity == Polarity::Positive }
}

fn require_ground_truth(a: &Refine, kind: BackendKind) -> CliResult<()> {
    if kind == BackendKind::Oracle && a.ground_truth.is_none() {
        return Err(CliError::usage("the oracle backend needs --ground-truth for this task"));
    }
    Ok(())
}

pub fn refine(ctx: &Ctx, a: &Refine) -> CliResult<()> {
    let kind = backend_kind(a, &ctx.config)?;
    let policy = PlaceholderPolicy { length_match: ctx.config.refine.length_match.unwrap_or(true) };
    let backend = build_backend(kind, a, &ctx.config, policy)?;
    let options = RefineOptions {
        temperature: a.temperature.or(ctx.config.backend.temperature).unwrap_or(0.0),
        max_output_chars: None,
        max_in_flight: a.max_in_flight.or(ctx.config.refine.max_in_flight).unwrap_or(ctx.jobs).max(1),
        policy,
    };
    let mut settings = json!({
        "task": format!("{:?}", a.task).to_lowercase(),
        "backend": backend.descriptor(),
        "temperature": options.temperature,
        "length_match": policy.length_match,
        "seed": ctx.seed,
    });
    let mut rec_inputs = vec![a.input.clone()];
    if let Some(gt) = &a.ground_truth {
        rec_inputs.push(gt.clone());
    }

    if a.task == Task::Code {
        return refine_code(ctx, a, kind, backend, &options, settings, rec_inputs);
    }

    let mut task = RefinementTask::new(match a.task {
        Task::Pii => TaskKind::PiiSentence,
        Task::Companies => TaskKind::CompaniesJson,
        Task::Detox => TaskKind::DetoxPair,
        Task::Code => unreachable!(),
    });
    let items: Vec<RefineInput> = match a.task {
        Task::Pii => {
            require_ground_truth(a, kind)?;
            if let Some(spec) = a.shots.as_ref().or(ctx.config.refine.shots.as_ref()) {
                let (k_pos, k_neg) = parse_shots(spec).map_err(CliError::usage)?;
                let catalog = load_catalog(&a.catalog, &ctx.config)?;
                let bank = load_bank(&a.catalog, &ctx.config)?;
                let shots = build_shot_bank(&catalog, &bank, k_pos, k_neg, ctx.seed).usage()?;
                task = task.with_shots(shots).usage()?;
                settings["shots"] = json!([k_pos, k_neg]);
                settings["catalog"] = catalog_settings(&a.catalog, &ctx.config, &catalog);
            }
            let truth: HashMap<String, OracleHint> = match &a.ground_truth {
                Some(p) => read_jsonl::<BenchmarkSentence>(p)?.iter().map(|s| (s.sentence_id.clone(), pii_hint(s))).collect(),
                None => HashMap::new(),
            };
            text_records(&a.input)?
                .into_iter()
                .map(|(id, text)| {
                    let hint = truth.get(&id).cloned();
                    let item = RefineInput::new(id, text);
                    match hint {
                        Some(h) => item.with_hint(h),
                        None => item,
                    }
                })
                .collect()
        }
        Task::Companies => read_jsonl::<CompanyEntry>(&a.input)?
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let text = serde_json::to_string(e).internal()?;
                Ok(RefineInput::new(format!("company-{i:05}"), text).with_hint(OracleHint::Companies))
            })
            .collect::<CliResult<_>>()?,
        Task::Detox => {
            require_ground_truth(a, kind)?;
            let truth: HashMap<String, OracleHint> = match &a.ground_truth {
                Some(p) => read_jsonl::<ToxicRecord>(p)?
                    .into_iter()
                    .map(|r| (r.record_id, OracleHint::Detox { facts: r.facts, qa: r.qa }))
                    .collect(),
                None => HashMap::new(),
            };
            text_records(&a.input)?
                .into_iter()
                .map(|(id, text)| {
                    let hint = truth.get(&id).cloned();
                    let item = RefineInput::new(id, text);
                    match hint {
                        Some(h) => item.with_hint(h),
                        None => item,
                    }
                })
                .collect()
        }
        Task::Code => unreachable!(),
    };

    let dataset = refine_dataset(&items, &task, backend.as_ref(), &options).usage()?;
    write_jsonl(&a.out, &dataset.records)?;
    let mut rec = Recorder::new("refine", settings);
    for p in &rec_inputs {
        rec.input(p);
    }
    rec.output(&a.out);
    rec.backend_id = Some(backend.descriptor().backend_id.clone());
    rec.counts.records = dataset.records.len();
    rec.counts.failures = dataset.failures.len();
    rec.counts.cached_hits = backend.cache_hits();
    rec.counts.network_calls = backend.network_calls();
    finish(rec, &a.out)?;
    println!("{}", a.out.display());
    if !dataset.failures.is_empty() {
        let first = &dataset.failures[0];
        return Err(CliError::new(
            Kind::Backend,
            format!("{} of {} records failed; first: {}: {}", dataset.failures.len(), items.len(), first.record_id, first.error),
        ));
    }
    Ok(())
}

fn safety_checker(config: &Config, policy: PlaceholderPolicy) -> CliResult<SafetyChecker> {
    match &config.code.safe_defaults {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display())).input()?;
            SafetyChecker::new(policy, &text).input()
        }
        None => Ok(SafetyChecker::with_policy(policy)),
    }
}

fn include_globs(flag: &[String], config: &Config) -> Vec<String> {
    if flag.is_empty() {
        config.code.include.clone().unwrap_or_default()
    } else {
        flag.to_vec()
    }
}

fn refine_code(
    ctx: &Ctx,
    a: &Refine,
    kind: BackendKind,
    backend: Arc<dyn Backend>,
    options: &RefineOptions,
    mut settings: Value,
    inputs: Vec<PathBuf>,
) -> CliResult<()> {
    require_ground_truth(a, kind)?;
    let include = include_globs(&a.include, &ctx.config);
    settings["include"] = json!(include);
    let ingested = ingest_codebase(&a.input, &include).input()?;
    let hints = match &a.ground_truth {
        Some(p) => oracle_hints(&ingested.lines, &read_jsonl::<SpanEntry>(p)?),
        None => HashMap::new(),
    };
    let checker = safety_checker(&ctx.config, options.policy)?;
    let rewrites = refine_lines(&ingested.lines, &hints, backend.as_ref(), options, &checker).usage()?;
    write_jsonl(&a.out, &rewrites)?;
    let mut rec = Recorder::new("refine", settings);
    for p in &inputs {
        rec.input(p);
    }
    rec.output(&a.out);
    if let Some(tree) = &a.tree_out {
        write_refined_tree(tree, &ingested.files, &rewrites).input()?;
        rec.output(tree);
    }
    let failures: Vec<&LineRewrite> = rewrites.iter().filter(|r| r.failed).collect();
    rec.backend_id = Some(backend.descriptor().backend_id.clone());
    rec.counts.records = rewrites.len();
    rec.counts.failures = failures.len();
    rec.counts.cached_hits = backend.cache_hits();
    rec.counts.network_calls = backend.network_calls();
    finish(rec, &a.out)?;
    for w in &ingested.warnings {
        log::warn!("skipped {}: {}", w.path, w.error);
    }
    println!("{}", a.out.display());
    if let Some(first) = failures.first() {
        return Err(CliError::new(
            Kind::Backend,
            format!("{} of {} lines failed; first: {}: {}", failures.len(), rewrites.len(), first.line.record_id(), first.error.as_deref().unwrap_or("")),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineFlag {
    pub file_path: String,
    pub line_number: usize,
    pub flagged: bool,
    pub categories: Vec<String>,
}

pub fn baseline(ctx: &Ctx, a: &Baseline) -> CliResult<()> {
    let catalog = load_catalog(&a.catalog, &ctx.config)?;
    let detector = Detector::new(&catalog).with_names(NameMatcher::builtin());
    let policy = PlaceholderPolicy { length_match: ctx.config.refine.length_match.unwrap_or(true) };
    let mut rec = Recorder::new(
        "baseline",
        json!({"task": format!("{:?}", a.task).to_lowercase(), "catalog": catalog_settings(&a.catalog, &ctx.config, &catalog)}),
    );
    rec.input(&a.input);
    rec.backend_id = Some("baseline".into());
    match a.task {
        BaselineTask::Pii => {
            let rows = read_jsonl::<Value>(&a.input)?;
            let texts = text_records(&a.input)?;
            let mut records = Vec::with_capacity(texts.len());
            for (row, (id, text)) in rows.iter().zip(texts) {
                let hint = serde_json::from_value::<BenchmarkSentence>(row.clone()).ok().map(|s| pii_hint(&s));
                let found = detector.detect(&text);
                let output = redact(&text, &found, &policy).internal()?;
                let (placeholder_ok, placeholder_reason) = if found.is_empty() {
                    (PlaceholderVerdict::NotApplicable, None)
                } else {
                    check_placeholders(&policy, &text, &output, hint.as_ref()).split()
                };
                records.push(RefinementRecord {
                    record_id: id,
                    drift: drift(&text, &output),
                    input: text,
                    output,
                    task_kind: TaskKind::PiiSentence,
                    backend_id: "baseline".into(),
                    prompt_hash: String::new(),
                    placeholder_ok,
                    placeholder_reason,
                    failed: false,
                    error: None,
                });
            }
            write_jsonl(&a.out, &records)?;
            rec.counts.records = records.len();
        }
        BaselineTask::Code => {
            let include = include_globs(&a.include, &ctx.config);
            let ingested = ingest_codebase(&a.input, &include).input()?;
            let flags: Vec<LineFlag> = ingested
                .lines
                .iter()
                .map(|l| {
                    let found = detector.detect(&l.text);
                    let mut categories: Vec<String> = found.spans.iter().map(|s| s.category_id.clone()).collect();
                    categories.dedup();
                    LineFlag { file_path: l.file_path.clone(), line_number: l.line_number, flagged: !found.is_empty(), categories }
                })
                .collect();
            write_jsonl(&a.out, &flags)?;
            rec.counts.records = flags.len();
        }
    }
    rec.output(&a.out);
    finish(rec, &a.out)?;
    println!("{}", a.out.display());
    Ok(())
}

fn text_field(v: &Value, name: &str, detox: bool) -> Option<String> {
    let text = v.get(name)?.as_str()?;
    if !detox {
        return Some(text.to_string());
    }
    let expected = v.get("input").and_then(Value::as_str).and_then(|i| extract_messages(i).ok()).map(|m| m.len());
    match expected.map(|n| parse_detox_output(text, n)) {
        Some(Ok(parsed)) => Some(parsed.cleaned_text()),
        _ => None,
    }
}

fn corpus_texts(path: &Path, name: &str, detox: bool) -> CliResult<Vec<String>> {
    let rows = read_jsonl::<Value>(path)?;
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        match text_field(row, name, detox) {
            Some(t) => out.push(t),
            None if detox => log::warn!("{}: row {} is not a parseable detox output; skipped", path.display(), i + 1),
            None => {
                return Err(CliError::new(Kind::Input, format!("{}: row {} has no string field {name:?}", path.display(), i + 1)))
            }
        }
    }
    Ok(out)
}

pub fn eval(ctx: &Ctx, e: &Eval) -> CliResult<()> {
    let reference = ReferenceFigures::default();
    match e {
        Eval::Pii { bench, refined, weighted, out } => {
            let bench_rows: Vec<BenchmarkSentence> = read_jsonl(bench)?;
            let refined_rows: Vec<RefinementRecord> = read_jsonl(refined)?;
            let weighting = if *weighted || ctx.config.evaluation.weighted.unwrap_or(false) {
                Weighting::Weighted
            } else {
                Weighting::Unweighted
            };
            let report = evaluate_pii(&bench_rows, &refined_rows, weighting).input()?;
            let a = &report.aggregate;
            eprintln!(
                "recall={:.3} precision={} f={}",
                a.recall,
                a.precision.map_or("n/a".into(), |p| format!("{p:.3}")),
                a.f_score.map_or("n/a".into(), |f| format!("{f:.3}"))
            );
            emit_report(out.as_deref(), &report)
        }
        Eval::Code { annotations, rewrites, baseline, out } => {
            if rewrites.is_none() && baseline.is_none() {
                return Err(CliError::usage("give --rewrites, --baseline, or both"));
            }
            let file = std::fs::File::open(annotations).map_err(|e| anyhow::anyhow!("{}: {e}", annotations.display())).input()?;
            let anns = read_annotations(file).input()?;
            let mut report = serde_json::Map::new();
            report.insert("n_lines".into(), json!(anns.len()));
            if let Some(path) = rewrites {
                let rows: Vec<LineRewrite> = read_jsonl(path)?;
                report.insert("refinement".into(), json!(score_agreement(&rows, &anns).input()?));
                let mut flags: BTreeMap<&str, usize> = BTreeMap::new();
                for f in rows.iter().flat_map(|r| &r.safety_flags) {
                    *flags.entry(f.as_str()).or_default() += 1;
                }
                for f in [SafetyFlag::NonStringRewrite, SafetyFlag::PlaceholderToPlaceholder, SafetyFlag::LengthMismatch] {
                    flags.entry(f.as_str()).or_default();
                }
                report.insert("safety_flags".into(), json!(flags));
                report.insert("hash_candidates".into(), json!(rows.iter().filter(|r| r.hash_candidate).count()));
                report.insert("failed_lines".into(), json!(rows.iter().filter(|r| r.failed).count()));
            }
            if let Some(path) = baseline {
                let rows: Vec<LineFlag> = read_jsonl(path)?;
                let agreement =
                    score_predictions(rows.iter().map(|r| (r.file_path.as_str(), r.line_number, r.flagged)), &anns).input()?;
                report.insert("baseline".into(), json!(agreement));
            }
            emit_report(out.as_deref(), &Value::Object(report))
        }
        Eval::Toxicity { input, field, detox, scorer, lexicon, endpoint, out } => {
            let texts = corpus_texts(input, field, *detox)?;
            let scorer_kind = match scorer {
                Some(s) => *s,
                None => match ctx.config.evaluation.scorer.as_deref() {
                    None | Some("lexicon") => ScorerArg::Lexicon,
                    Some("perspective") => ScorerArg::Perspective,
                    Some(other) => return Err(CliError::usage(format!("unknown scorer {other:?}"))),
                },
            };
            let scorer: Box<dyn ToxicityScorer> = match scorer_kind {
                ScorerArg::Lexicon => Box::new(LexiconScorer {
                    lexicon: match lexicon {
                        Some(p) => Lexicon::parse(&std::fs::read_to_string(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display())).input()?),
                        None => Lexicon::builtin(),
                    },
                }),
                ScorerArg::Perspective => Box::new(PerspectiveScorer::from_env(endpoint.clone()).usage()?),
            };
            let report = score_corpus(&texts, scorer.as_ref());
            emit_report(out.as_deref(), &json!({"scores": report, "reference_mean_toxicity": reference.toxicity_mean}))
        }
        Eval::Diversity { input, field, detox, sample, embedder, embeddings_csv, out } => {
            let texts = corpus_texts(input, field, *detox)?;
            let sample = sample.or(ctx.config.evaluation.sample).unwrap_or(texts.len());
            let embedder_kind = match embedder {
                Some(e) => *e,
                None => match ctx.config.evaluation.embedder.as_deref() {
                    None | Some("hashing") => EmbedderArg::Hashing,
                    Some("none") => EmbedderArg::None,
                    Some(other) => return Err(CliError::usage(format!("unknown embedder {other:?}"))),
                },
            };
            let hashing = HashingEmbedder::default();
            let chosen: Option<&dyn Embedder> = match embedder_kind {
                EmbedderArg::Hashing => Some(&hashing),
                EmbedderArg::None => None,
            };
            let report = mean_pairwise_diversity(&texts, sample, ctx.seed, chosen).usage()?;
            if let Some(csv_path) = embeddings_csv {
                let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
                let vectors = hashing.embed(&refs).internal()?;
                let ids: Vec<String> = (0..texts.len()).map(|i| i.to_string()).collect();
                let mut buf = Vec::new();
                write_embeddings_csv(&mut buf, &ids, &vectors).internal()?;
                jsonl::write_atomic(csv_path, &buf).input()?;
            }
            emit_report(
                out.as_deref(),
                &json!({
                    "diversity": report,
                    "reference": {"rouge2": reference.rouge2, "embedding_distance": reference.embedding_distance},
                }),
            )
        }
    }
}

pub fn quiz(ctx: &Ctx, q: &Quiz) -> CliResult<()> {
    match q {
        Quiz::Build { input, k, out } => {
            let rows: Vec<RefinementRecord> = read_jsonl(input)?;
            let mut parsed = Vec::new();
            for r in rows.iter().filter(|r| !r.failed) {
                let expected = match extract_messages(&r.input) {
                    Ok(m) => m.len(),
                    Err(e) => {
                        log::warn!("{}: {e}; skipped", r.record_id);
                        continue;
                    }
                };
                match parse_detox_output(&r.output, expected) {
                    Ok(d) => parsed.push((r.record_id.clone(), d)),
                    Err(e) => log::warn!("{}: {e}; skipped", r.record_id),
                }
            }
            let items = build_quiz(&parsed, *k, ctx.seed).input()?;
            write_jsonl(out, &items)?;
            let mut rec = Recorder::new("quiz-build", json!({"k": k, "seed": ctx.seed}));
            rec.input(input);
            rec.output(out);
            rec.counts.records = items.len();
            finish(rec, out)?;
            println!("{}", out.display());
            Ok(())
        }
        Quiz::Grade { items, responses, out } => {
            let items: Vec<QuizItem> = read_jsonl(items)?;
            let responses: Vec<QuizResponse> = read_jsonl(responses)?;
            let mut by_tag: BTreeMap<String, Vec<QuizItem>> = BTreeMap::new();
            for item in &items {
                by_tag.entry(item.tag.clone()).or_default().push(item.clone());
            }
            let tags: BTreeMap<String, _> = by_tag.iter().map(|(t, v)| (t.clone(), grade_quiz(v, &responses))).collect();
            let overall = grade_quiz(&items, &responses);
            eprintln!("accuracy={:.3} ({}/{})", overall.accuracy, overall.correct, overall.total);
            emit_report(out.as_deref(), &json!({"overall": overall, "by_tag": tags}))
        }
        Quiz::Companies { original, refined, items_out, out } => {
            let originals: Vec<CompanyEntry> = read_jsonl(original)?;
            let refined_rows: Vec<RefinementRecord> = read_jsonl(refined)?;
            let refined_entries: Vec<CompanyEntry> = refined_rows
                .iter()
                .map(|r| {
                    serde_json::from_str(&r.output)
                        .map_err(|e| CliError::new(Kind::Input, format!("{}: refined output is not a company record: {e}", r.record_id)))
                })
                .collect::<CliResult<_>>()?;
            let items = derive_corpus_qa(&originals);
            let responder = LookupResponder::from_corpus(&refined_entries);
            let responses: Vec<QuizResponse> = items
                .iter()
                .map(|i| QuizResponse { item_id: i.item_id.clone(), response: responder.answer(&i.question).unwrap_or_default().to_string() })
                .collect();
            if let Some(p) = items_out {
                write_jsonl(p, &items)?;
            }
            let scores = score_public_private(&items, &responses);
            eprintln!("public={:.3} private={:.3}", scores.public_accuracy, scores.private_accuracy);
            emit_report(
                out.as_deref(),
                &json!({
                    "scores": scores,
                    "reference": {"public": ReferenceFigures::default().companies_public, "private": ReferenceFigures::default().companies_private},
                }),
            )
        }
    }
}

pub fn synth_code(ctx: &Ctx, lines: usize, out: &Path) -> CliResult<()> {
    let corpus = synth_code_corpus(lines, ctx.seed);
    corpus.write_to(out).input()?;
    let mut rec = Recorder::new("code-synth", json!({"lines": lines, "seed": ctx.seed}));
    rec.output(out);
    rec.counts.records = corpus.line_count();
    finish(rec, out)?;
    println!("{}", out.display());
    Ok(())
}

pub fn synth_records<T: Serialize>(ctx: &Ctx, command: &str, n: usize, out: &Path, records: &[T]) -> CliResult<()> {
    write_jsonl(out, records)?;
    let mut rec = Recorder::new(command, json!({"n": n, "seed": ctx.seed}));
    rec.output(out);
    rec.counts.records = records.len();
    finish(rec, out)?;
    println!("{}", out.display());
    Ok(())
}

pub fn synth_companies_cmd(ctx: &Ctx, n: usize, out: &Path) -> CliResult<()> {
    synth_records(ctx, "companies-synth", n, out, &synth_companies(n, ctx.seed))
}

pub fn synth_detox_cmd(ctx: &Ctx, n: usize, out: &Path) -> CliResult<()> {
    synth_records(ctx, "detox-synth", n, out, &synth_toxic_pairs(n, ctx.seed))
}
