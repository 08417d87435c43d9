use std::path::PathBuf;
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand};

fn version() -> &'static str {
    static V: OnceLock<String> = OnceLock::new();
    V.get_or_init(|| format!("{} (model format {})", shortshift::VERSION, shortshift::embedding::FORMAT_VERSION))
}

#[derive(Debug, Parser)]
#[command(name = "shortshift", version = version(), about = "Short-term lexical meaning shift detection")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Pipeline configuration (TOML). Flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker lanes for training; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<u32>,
    /// Single lane, so every output is bit-reproducible.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize raw text into a time-binned corpus directory.
    Ingest(IngestArgs),
    /// Train embeddings for one bin, from random vectors or a parent model.
    Train(TrainArgs),
    /// Cosine-distance shift scores between two chained models.
    Score(ScoreArgs),
    /// Contextual variability of words in one bin.
    Variability(VariabilityArgs),
    /// Compare scores with human judgments.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic corpus with planted shifts, optionally scoring it.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Output corpus directory; defaults to `paths.corpus`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Time bin as LABEL:START:END, dates as YYYY-MM-DD or Unix seconds;
    /// END is exclusive (repeatable).
    #[arg(long = "bin", value_name = "LABEL:START:END")]
    pub bins: Vec<String>,
    /// JSON-lines input, one record per line (repeatable).
    #[arg(long, value_name = "FILE")]
    pub jsonl: Vec<PathBuf>,
    #[arg(long, default_value = "body")]
    pub text_field: String,
    #[arg(long, default_value = "created_utc")]
    pub time_field: String,
    /// Plain text, one document per line, into its own bin (repeatable).
    #[arg(long, value_name = "LABEL=FILE")]
    pub text: Vec<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Corpus directory; defaults to `paths.corpus`.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Bin to train on.
    #[arg(long)]
    pub bin: String,
    /// Model file to write; defaults to `<paths.models>/<bin>.ssem`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Start from this model's vectors and vocabulary instead of random ones.
    #[arg(long, value_name = "MODEL")]
    pub init_from: Option<PathBuf>,
    /// Minimum count in the training bin for a word to enter the vocabulary
    /// (random initialization only).
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Keep only words also present in these bins (repeatable; random
    /// initialization only).
    #[arg(long = "intersect", value_name = "BIN")]
    pub intersect: Vec<String>,
    #[arg(long)]
    pub dim: Option<u32>,
    #[arg(long)]
    pub epochs: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the vectors as word2vec text.
    #[arg(long, value_name = "FILE")]
    pub text_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Model of the earlier bin.
    #[arg(long)]
    pub t1: PathBuf,
    /// Model of the later bin, chained from `--t1`.
    #[arg(long)]
    pub t2: PathBuf,
    /// Shift TSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Words to score, one per line; defaults to the whole vocabulary.
    #[arg(long, value_name = "FILE")]
    pub words: Option<PathBuf>,
    /// Score only content words whose frequency rose (needs a corpus and a
    /// content-word list).
    #[arg(long, conflicts_with = "words")]
    pub candidates: bool,
    /// Corpus for per-bin frequencies; defaults to `paths.corpus`.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Content words, one per line; defaults to `paths.content_words`.
    #[arg(long)]
    pub content_words: Option<PathBuf>,
    /// Also compute contextual variability in the later bin.
    #[arg(long)]
    pub variability: bool,
    /// Judgments CSV; labels each judged word with its region.
    #[arg(long)]
    pub judgments: Option<PathBuf>,
    /// Write `word, shift_index, cosine` for plotting (needs judgments).
    #[arg(long, value_name = "FILE", requires = "judgments")]
    pub scatter: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VariabilityArgs {
    /// Corpus directory; defaults to `paths.corpus`.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Bin to read contexts from; defaults to the model's bin.
    #[arg(long)]
    pub bin: Option<String>,
    /// Model whose vectors embed the contexts.
    #[arg(long)]
    pub model: PathBuf,
    /// Words to score, one per line.
    #[arg(long, value_name = "FILE")]
    pub words: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub max_contexts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Judgments CSV for a `word, shift_index, variability` scatter file.
    #[arg(long, requires = "scatter")]
    pub judgments: Option<PathBuf>,
    #[arg(long, value_name = "FILE", requires = "judgments")]
    pub scatter: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Judgments CSV with header `annotator,word,judgment`; defaults to
    /// `paths.judgments`.
    #[arg(long)]
    pub judgments: Option<PathBuf>,
    /// TSV with a `word` column and a score column.
    #[arg(long)]
    pub scores: PathBuf,
    /// Score column to correlate.
    #[arg(long, default_value = "cosine")]
    pub column: String,
    /// Words to drop from the judgments, one per line.
    #[arg(long, value_name = "FILE")]
    pub exclude: Option<PathBuf>,
    /// `word<TAB>group` file for per-group index statistics.
    #[arg(long, value_name = "FILE")]
    pub groups: Option<PathBuf>,
    /// Group standard deviations divide by n - 1 instead of n.
    #[arg(long)]
    pub sample_sd: bool,
    /// Per-word evaluation TSV to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory for the corpus and gold labels.
    #[arg(long)]
    pub out: PathBuf,
    /// Generator settings (TOML); defaults are used otherwise.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Train on the generated corpus and report how well the planted words
    /// are recovered.
    #[arg(long)]
    pub benchmark: bool,
    #[arg(long)]
    pub dim: Option<u32>,
    #[arg(long)]
    pub epochs: Option<u32>,
}
