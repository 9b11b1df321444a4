//! `sagtag` extracts ranked video tags from time-sync comment streams.
//!
//! Exit codes: 0 on success, 1 when an evaluation finds mismatched inputs
//! (gold videos missing from the tag file), 2 on i/o or parse failures.

mod commands;
mod records;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sagtag_core::pipeline::{Clusterer, IdfMode, PipelineConfig};

#[derive(Parser)]
#[command(name = "sagtag", version, about = "Video tag extraction from time-sync comments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract ranked tags per video.
    Extract(ExtractArgs),
    /// Stop after topic partitioning and dump the partition.
    Cluster(ClusterArgs),
    /// Score a tags file against gold tags.
    Eval(EvalArgs),
    /// Run both clusterers per video and report H-hit counts by density.
    Compare(CompareArgs),
    /// Generate a synthetic corpus with planted topics.
    Gen(GenArgs),
}

/// Knobs shared by every command that runs the pipeline.
#[derive(Args, Clone)]
struct PipelineArgs {
    /// Word vectors in word2vec text format.
    #[arg(long)]
    embeddings: PathBuf,
    /// Token normalization config (JSON: slang_map, stopwords, symbol_filter).
    #[arg(long)]
    norm_config: Option<PathBuf>,
    /// dialogue, topic-center, or auto (pick by density).
    #[arg(long, default_value = "auto")]
    clusterer: Clusterer,
    /// Density split for auto mode, comments per minute.
    #[arg(long, default_value_t = 60.0)]
    density_threshold: f64,
    /// Decay rate; defaults to 0.12 (dialogue) or 0.13 (topic-center).
    #[arg(long)]
    gamma_t: Option<f64>,
    /// Dialogue merge threshold on intra-cluster density.
    #[arg(long, default_value_t = 0.34)]
    rho_d: f64,
    /// Topic-center merge threshold on affinity.
    #[arg(long, default_value_t = 0.38)]
    rho_c: f64,
    /// Influence iteration turns.
    #[arg(long, default_value_t = 50)]
    turns: usize,
    /// Early-stop tolerance on the influence iteration.
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    /// Skip comment pairs whose decay factor falls below this.
    #[arg(long, default_value_t = 1e-4)]
    edge_cutoff_eps: f64,
    /// Tags per video.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// per-video or corpus document scope for idf.
    #[arg(long, default_value = "per-video", value_parser = parse_idf_mode)]
    idf_mode: IdfMode,
    /// Videos processed concurrently (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_idf_mode(s: &str) -> Result<IdfMode, String> {
    match s {
        "per-video" => Ok(IdfMode::PerVideo),
        "corpus" => Ok(IdfMode::Corpus),
        other => Err(format!("unknown idf mode {other:?}, expected per-video or corpus")),
    }
}

impl PipelineArgs {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            clusterer: self.clusterer,
            density_threshold: self.density_threshold,
            gamma_t: self.gamma_t,
            rho_d: self.rho_d,
            rho_c: self.rho_c,
            turns: self.turns,
            tol: self.tol,
            edge_cutoff_eps: self.edge_cutoff_eps,
            k: self.k,
            idf_mode: self.idf_mode,
        }
    }
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Comments, JSON-lines.
    input: PathBuf,
    /// Tag records, JSON-lines (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Ranking method.
    #[arg(long, default_value = "swidf", value_parser = ["swidf", "tfidf"])]
    method: String,
    /// Include a per-topic block (size, time span, top words).
    #[arg(long)]
    topics: bool,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Embed the semantic association graph in each record.
    #[arg(long)]
    dump_graph: bool,
    /// Record the merge trace (topic-center only).
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Tag records produced by `extract`.
    #[arg(long)]
    tags: PathBuf,
    /// Gold tags, JSON-lines {video_id, tags:[...]}.
    #[arg(long)]
    gold: PathBuf,
    /// Comma-separated cutoffs.
    #[arg(long, default_value = "5,10,15", value_delimiter = ',')]
    k: Vec<usize>,
    /// Per-video CSV report path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    input: PathBuf,
    /// Per-video CSV detail path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Directory for comments.jsonl, embeddings.txt, gold.jsonl,
    /// planted.jsonl.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    videos: usize,
    #[arg(long, default_value_t = 3)]
    topics: usize,
    #[arg(long, default_value_t = 12)]
    comments_per_topic: usize,
    #[arg(long, default_value_t = 6)]
    vocab_per_topic: usize,
    /// Comments per minute.
    #[arg(long, default_value_t = 30.0)]
    density: f64,
    #[arg(long, default_value_t = 0.2)]
    noise_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Embedding dimension.
    #[arg(long, default_value_t = 16)]
    dim: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Extract(args) => commands::extract(args),
        Command::Cluster(args) => commands::cluster(args),
        Command::Eval(args) => commands::eval(args),
        Command::Compare(args) => commands::compare(args),
        Command::Gen(args) => commands::gen(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
