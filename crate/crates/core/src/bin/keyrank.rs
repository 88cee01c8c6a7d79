//! Batch CLI for keyphrase extraction, tagger training, and evaluation.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use keyrank::cli::{
    cmd_embed_stdio, cmd_eval, cmd_extract, cmd_train_tagger, BackendSpec, CliError,
    ExtractorKind, InputFormat, RunConfig, TaggerSource, BACKEND_ENV_VAR,
};
use keyrank::eval::ReportFormat;

#[derive(Parser)]
#[command(
    name = "keyrank",
    version,
    about = "Keyphrase extraction: POS-pattern candidates ranked by embedding similarity, plus baselines and an evaluation harness"
)]
struct Cli {
    /// Worker threads for document-level parallelism (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the averaged-perceptron tagger on a CoNLL-U corpus.
    TrainTagger {
        /// CoNLL-U file with Penn tags in the XPOS column.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 5)]
        iterations: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Where to write the serialized model.
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract keyphrases from a text file, JSONL corpus, or CoNLL-U file.
    Extract {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        input: PathBuf,
        /// text | jsonl | conllu (default: inferred from the input).
        #[arg(long)]
        input_format: Option<String>,
        /// Output JSONL path (default: stdout).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate an extractor against a gold corpus and print P/R/F1@N.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Inspec-style directory or JSONL corpus file.
        #[arg(long)]
        corpus: PathBuf,
        /// Report cutoffs, e.g. 5,10,20.
        #[arg(long, value_delimiter = ',')]
        n_values: Option<Vec<usize>>,
        /// table | json | csv.
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Serve the deterministic reference embedder over the stdio protocol.
    EmbedStdio {
        #[arg(long, default_value_t = 256)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Run-configuration flags shared by `extract` and `eval`. Every flag
/// overrides the config file (or built-in default) it is given on top of.
#[derive(Args)]
struct RunArgs {
    /// JSON run-config file to start from.
    #[arg(long)]
    config: Option<PathBuf>,
    /// patternrank_pos | patternrank_np | singlerank | ngram.
    #[arg(long)]
    extractor: Option<String>,
    /// Replacement POS pattern in the pattern DSL.
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    top_n: Option<usize>,
    /// http:URL | stdio:CMD | precomputed:PATH | reference:DIM:SEED.
    #[arg(long)]
    backend: Option<String>,
    /// Serialized tagger model for raw-text input.
    #[arg(long, conflicts_with = "conllu")]
    tagger_model: Option<PathBuf>,
    /// Treat the input as pre-tagged CoNLL-U.
    #[arg(long)]
    conllu: bool,
    /// Co-occurrence window for singlerank.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    damping: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// n-gram bounds for the ngram extractor, e.g. 1,3.
    #[arg(long)]
    ngram_range: Option<String>,
    /// Stopword file (one word per line) for the ngram extractor.
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(name) = &self.extractor {
            config.extractor = ExtractorKind::from_name(name)?;
        }
        if let Some(pattern) = self.pattern {
            config.pattern_override = Some(pattern);
        }
        if let Some(top_n) = self.top_n {
            config.top_n = top_n;
        }
        let backend_spec = match self.backend {
            Some(spec) => Some(spec),
            None => std::env::var(BACKEND_ENV_VAR).ok(),
        };
        if let Some(spec) = backend_spec {
            config.backend = Some(BackendSpec::parse(&spec)?);
        }
        if let Some(path) = self.tagger_model {
            config.tagger = Some(TaggerSource::Model { path });
        } else if self.conllu {
            config.tagger = Some(TaggerSource::ConlluInput);
        }
        if let Some(window) = self.window {
            config.window = window;
        }
        if let Some(damping) = self.damping {
            config.damping = damping;
        }
        if let Some(tol) = self.tol {
            config.tolerance = tol;
        }
        if let Some(max_iter) = self.max_iter {
            config.max_iter = max_iter;
        }
        if let Some(range) = &self.ngram_range {
            let (min, max) = range
                .split_once(',')
                .ok_or_else(|| CliError::Config(format!("bad ngram range {range:?}")))?;
            config.ngram_min = min
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad ngram minimum {min:?}")))?;
            config.ngram_max = max
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad ngram maximum {max:?}")))?;
        }
        if let Some(path) = self.stopwords {
            config.stopwords_path = Some(path);
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))?;
    }

    match cli.command {
        Command::TrainTagger {
            corpus,
            iterations,
            seed,
            out,
        } => cmd_train_tagger(&corpus, iterations, seed, &out),
        Command::Extract {
            run,
            input,
            input_format,
            output,
        } => {
            let config = run.into_config()?;
            let format = match input_format {
                Some(name) => InputFormat::from_name(&name)?,
                None => InputFormat::infer(&config, &input),
            };
            cmd_extract(&config, &input, format, output.as_deref())
        }
        Command::Eval {
            run,
            corpus,
            n_values,
            format,
        } => {
            let mut config = run.into_config()?;
            if let Some(n_values) = n_values {
                config.n_values = n_values;
            }
            let format = match format.as_str() {
                "table" => ReportFormat::Table,
                "json" => ReportFormat::Json,
                "csv" => ReportFormat::Csv,
                other => {
                    return Err(CliError::Config(format!(
                        "unknown report format {other:?} (expected table, json, or csv)"
                    )))
                }
            };
            cmd_eval(&config, &corpus, format)
        }
        Command::EmbedStdio { dim, seed } => cmd_embed_stdio(dim, seed),
    }
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
