use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliResult, Classify};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub benchmark: BenchmarkSection,
    pub backend: BackendSection,
    pub refine: RefineSection,
    pub evaluation: EvaluationSection,
    pub code: CodeSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSection {
    pub categories: Option<Vec<String>>,
    pub n_per_category: Option<usize>,
    pub templates: Option<PathBuf>,
    pub template_pool: Option<usize>,
    pub catalog: Option<PathBuf>,
    pub hotwords: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub kind: Option<String>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub response_pointer: Option<String>,
    pub temperature: Option<f64>,
    pub cache_dir: Option<PathBuf>,
    pub max_attempts: Option<u32>,
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSection {
    pub shots: Option<String>,
    pub max_in_flight: Option<usize>,
    pub length_match: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub weighted: Option<bool>,
    pub sample: Option<usize>,
    pub embedder: Option<String>,
    pub scorer: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodeSection {
    pub include: Option<Vec<String>>,
    pub safe_defaults: Option<PathBuf>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> CliResult<Config> {
        let Some(path) = path else { return Ok(Config::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))
            .usage()?;
        toml::from_str(&text).map_err(|e| anyhow::anyhow!("config {}: {e}", path.display())).usage()
    }
}

/// Parses `k_pos,k_neg`.
pub fn parse_shots(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected k_pos,k_neg, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad shot count {x:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}
