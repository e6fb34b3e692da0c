use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "refinery", version, about = "Generate PII benchmarks, refine datasets through generative backends, and score the results")]
pub struct Cli {
    /// TOML config; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: logical CPUs).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a paired PII benchmark as JSONL.
    GenBenchmark(GenBenchmark),
    /// Write prompt/target pairs for supervised fine-tuning.
    ExportSft(ExportSft),
    /// Rewrite a dataset through a backend.
    Refine(Refine),
    /// Run the rule-based detector instead of a backend.
    Baseline(Baseline),
    /// Score refinement outputs.
    #[command(subcommand)]
    Eval(Eval),
    /// Build or grade quizzes.
    #[command(subcommand)]
    Quiz(Quiz),
    /// Synthetic code corpus tools.
    #[command(subcommand)]
    Code(Synth),
    /// Synthetic company records.
    #[command(subcommand)]
    Companies(SynthN),
    /// Synthetic toxic exchanges.
    #[command(subcommand)]
    Detox(SynthN),
}

#[derive(Debug, Args, Default)]
pub struct CatalogArgs {
    /// Comma-separated category ids (default: all).
    #[arg(long, value_delimiter = ',')]
    pub categories: Option<Vec<String>>,
    /// Format-spec file replacing the built-in catalog.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Hot-word file used with --catalog.
    #[arg(long)]
    pub hotwords: Option<PathBuf>,
    /// Template TSV replacing the built-in bank.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Use only the first N templates of each kind.
    #[arg(long)]
    pub template_pool: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenBenchmark {
    #[command(flatten)]
    pub catalog: CatalogArgs,
    #[arg(long)]
    pub n_per_category: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportSft {
    #[command(flatten)]
    pub catalog: CatalogArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Pii,
    Companies,
    Code,
    Detox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Http,
    Oracle,
    Identity,
    Scrambler,
}

#[derive(Debug, Args)]
pub struct Refine {
    #[arg(long, value_enum)]
    pub task: Task,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Input JSONL, or a source directory for the code task.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Few-shot counts as `k_pos,k_neg` (pii task only).
    #[arg(long)]
    pub shots: Option<String>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Ground truth for the oracle: benchmark JSONL (pii), toxic records (detox) or spans JSONL (code).
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub max_in_flight: Option<usize>,
    /// Glob of files to include (code task; repeatable).
    #[arg(long)]
    pub include: Vec<String>,
    /// Directory for reassembled refined sources (code task).
    #[arg(long)]
    pub tree_out: Option<PathBuf>,
    #[command(flatten)]
    pub catalog: CatalogArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineTask {
    Pii,
    Code,
}

#[derive(Debug, Args)]
pub struct Baseline {
    #[arg(long, value_enum)]
    pub task: BaselineTask,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub include: Vec<String>,
    #[command(flatten)]
    pub catalog: CatalogArgs,
}

#[derive(Debug, Subcommand)]
pub enum Eval {
    /// Recall, precision and F per category.
    Pii {
        #[arg(long)]
        bench: PathBuf,
        #[arg(long)]
        refined: PathBuf,
        /// Pool counts across categories instead of averaging per category.
        #[arg(long)]
        weighted: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Line and document agreement with annotations.
    Code {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        rewrites: Option<PathBuf>,
        /// Line flags written by `baseline --task code`.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean toxicity of a text field.
    Toxicity {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "text")]
        field: String,
        /// Score the cleaned messages of structured detox outputs.
        #[arg(long)]
        detox: bool,
        #[arg(long, value_enum)]
        scorer: Option<ScorerArg>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean pairwise ROUGE-2 and embedding distance.
    Diversity {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "text")]
        field: String,
        #[arg(long)]
        detox: bool,
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, value_enum)]
        embedder: Option<EmbedderArg>,
        #[arg(long)]
        embeddings_csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScorerArg {
    Lexicon,
    Perspective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmbedderArg {
    None,
    Hashing,
}

#[derive(Debug, Subcommand)]
pub enum Quiz {
    /// Sample question/answer items from refined detox outputs.
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Grade responses against quiz items.
    Grade {
        #[arg(long)]
        items: PathBuf,
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Question/answer items about a company corpus, answered by lookup in a refined corpus.
    Companies {
        #[arg(long)]
        original: PathBuf,
        /// Refined records from `refine --task companies`.
        #[arg(long)]
        refined: PathBuf,
        #[arg(long)]
        items_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Synth {
    /// Annotated multi-language source tree.
    Synth {
        #[arg(long, default_value_t = 500)]
        lines: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum SynthN {
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}
