//! `densekit`: embed, index, search, evaluate and bench from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "densekit", version, about = "Dense retrieval pipeline: embed, index, search, evaluate, bench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed `(docid, text)` JSON lines into a vector corpus.
    Embed(EmbedArgs),
    /// Build an HNSW index image from a vector corpus.
    Index(IndexArgs),
    /// Search an index with query vectors and write a TREC run.
    Search(SearchArgs),
    /// Score a TREC run against qrels.
    Evaluate(EvaluateArgs),
    /// Measure query throughput.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum IndexType {
    Hnsw,
    /// Exact search; `--index` then names a vector corpus file.
    Flat,
}

#[derive(Args)]
struct EmbedArgs {
    /// Text JSON lines (`docid`/`id`/`qid` and `text`/`contents`), optionally gzipped.
    #[arg(long)]
    input: PathBuf,
    /// Vector JSON lines. Progress is kept in `<output>.partial` until the job completes.
    #[arg(long)]
    output: PathBuf,
    /// Gzip the output.
    #[arg(long)]
    gz: bool,
    /// Use the offline deterministic embedder instead of an endpoint.
    #[arg(long)]
    mock: bool,
    #[arg(long, default_value_t = 1536)]
    dim: usize,
    /// Seed of the mock embedder.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Base URL of an OpenAI-compatible API.
    #[arg(long, env = "DENSEKIT_ENDPOINT", default_value = "https://api.openai.com/v1")]
    endpoint: String,
    #[arg(long, env = "DENSEKIT_MODEL", default_value = "text-embedding-ada-002")]
    model: String,
    /// File holding the API key; otherwise OPENAI_API_KEY is read.
    #[arg(long)]
    api_key_file: Option<PathBuf>,
    /// Inputs are truncated to this many tokens.
    #[arg(long, default_value_t = 512)]
    max_tokens: usize,
    /// Requests per minute.
    #[arg(long, default_value_t = 3500)]
    rate_limit: usize,
    /// Concurrent requests.
    #[arg(long, alias = "threads", default_value_t = 8)]
    parallel: usize,
    /// Attempts per input, including the first.
    #[arg(long, default_value_t = 6)]
    max_attempts: u32,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    /// Skip malformed input lines instead of failing.
    #[arg(long)]
    skip_bad_lines: bool,
}

#[derive(Args)]
struct IndexArgs {
    /// Vector JSON lines, optionally gzipped.
    #[arg(long)]
    input: PathBuf,
    /// Index image to write.
    #[arg(long)]
    output: PathBuf,
    #[arg(short = 'm', long = "m", default_value_t = 16)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    ef_construction: usize,
    /// Worker threads; 1 gives a reproducible image for a fixed seed.
    #[arg(long)]
    threads: Option<usize>,
    /// Level-sampling seed; drawn at random and reported when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Force gzip decoding of the input (otherwise detected).
    #[arg(long)]
    gz: bool,
    #[arg(long)]
    skip_bad_lines: bool,
}

#[derive(Args)]
struct IndexSource {
    /// Index image, or a vector corpus with `--index-type flat`.
    #[arg(long)]
    index: PathBuf,
    #[arg(long, value_enum, default_value_t = IndexType::Hnsw)]
    index_type: IndexType,
    /// Query vectors as JSON lines (`docid` or `qid` names the query).
    #[arg(long)]
    queries: PathBuf,
    /// Force gzip decoding of vector inputs.
    #[arg(long)]
    gz: bool,
    #[arg(short = 'k', long = "k", default_value_t = 1000)]
    k: usize,
    #[arg(long, default_value_t = 1000)]
    ef_search: usize,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    source: IndexSource,
    /// Run file to write; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "densekit")]
    tag: String,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    /// Minimum grade counted as relevant for RR, AP and recall.
    #[arg(long, default_value_t = 1)]
    rel_threshold: u32,
    /// Also write the JSON lines here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    source: IndexSource,
    #[arg(long, default_value_t = 4)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    warmup: usize,
}

/// Failures attributable to how the command was invoked.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<densekit::Error>() {
            return match e {
                densekit::Error::InvalidArgument(_) => EXIT_USAGE,
                e if e.is_data_error() => EXIT_DATA,
                _ => EXIT_RUNTIME,
            };
        }
    }
    EXIT_RUNTIME
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Embed(args) => commands::embed(args),
        Command::Index(args) => commands::index(args),
        Command::Search(args) => commands::search(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Bench(args) => commands::bench(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
