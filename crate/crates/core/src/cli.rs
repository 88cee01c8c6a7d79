//! Batch front end: run configuration, pipeline wiring, and the command
//! implementations behind the `keyrank` binary.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{self, EvalError, Extractor, ReportFormat};
use crate::pattern::{
    builtin_pattern, compile, extract_candidates, parse_pattern, select_ngrams, BuiltinPattern,
    Matcher, PatternError,
};
use crate::ranker::{
    rank_candidates, reference_embedder, top_n, BackendError, EmbeddingBackend, HttpBackend,
    PrecomputedBackend, RankError, RankedKeyphrase, StdioBackend,
};
use crate::singlerank::{build_graph, score_candidates, weighted_pagerank, SingleRankError};
use crate::textpipe::{
    load_conllu, load_conllu_sentences, tag_document, train_tagger, TaggedDocument, TaggerModel,
    TextpipeError,
};

/// Environment variable consulted when no backend is given on the command
/// line or in a config file.
pub const BACKEND_ENV_VAR: &str = "PATTERNRANK_BACKEND";

/// Command errors, bucketed by exit code: configuration problems exit 2,
/// backend and ranking failures exit 3, input/output problems exit 4.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Backend(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Backend(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> CliError {
        CliError::Backend(e.to_string())
    }
}

impl From<RankError> for CliError {
    fn from(e: RankError) -> CliError {
        CliError::Backend(e.to_string())
    }
}

impl From<PatternError> for CliError {
    fn from(e: PatternError) -> CliError {
        CliError::Config(e.to_string())
    }
}

impl From<SingleRankError> for CliError {
    fn from(e: SingleRankError) -> CliError {
        CliError::Backend(e.to_string())
    }
}

impl From<TextpipeError> for CliError {
    fn from(e: TextpipeError) -> CliError {
        CliError::Io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> CliError {
        match e {
            EvalError::Extractor { doc_id, source } => {
                CliError::Backend(format!("document {doc_id}: {source}"))
            }
            other => CliError::Io(other.to_string()),
        }
    }
}

/// The selectable extraction methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractorKind {
    PatternrankPos,
    PatternrankNp,
    Singlerank,
    Ngram,
}

impl ExtractorKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExtractorKind::PatternrankPos => "patternrank_pos",
            ExtractorKind::PatternrankNp => "patternrank_np",
            ExtractorKind::Singlerank => "singlerank",
            ExtractorKind::Ngram => "ngram",
        }
    }

    pub fn from_name(name: &str) -> Result<ExtractorKind, CliError> {
        match name {
            "patternrank_pos" => Ok(ExtractorKind::PatternrankPos),
            "patternrank_np" => Ok(ExtractorKind::PatternrankNp),
            "singlerank" => Ok(ExtractorKind::Singlerank),
            "ngram" => Ok(ExtractorKind::Ngram),
            other => Err(CliError::Config(format!(
                "unknown extractor {other:?} (expected patternrank_pos, patternrank_np, singlerank, or ngram)"
            ))),
        }
    }

    fn needs_backend(&self) -> bool {
        !matches!(self, ExtractorKind::Singlerank)
    }
}

/// Where embeddings come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSpec {
    Http {
        url: String,
        max_chars: Option<usize>,
    },
    Stdio {
        command: String,
    },
    Precomputed {
        path: PathBuf,
    },
    Reference {
        dim: usize,
        seed: u64,
    },
}

impl BackendSpec {
    /// Parse the CLI form: `http:URL`, `stdio:CMD`, `precomputed:PATH`, or
    /// `reference:DIM:SEED`.
    pub fn parse(spec: &str) -> Result<BackendSpec, CliError> {
        let (scheme, rest) = spec
            .split_once(':')
            .ok_or_else(|| CliError::Config(format!("malformed backend spec {spec:?}")))?;
        match scheme {
            "http" => Ok(BackendSpec::Http {
                url: rest.to_string(),
                max_chars: None,
            }),
            "stdio" => Ok(BackendSpec::Stdio {
                command: rest.to_string(),
            }),
            "precomputed" => Ok(BackendSpec::Precomputed {
                path: PathBuf::from(rest),
            }),
            "reference" => {
                let (dim, seed) = rest.split_once(':').ok_or_else(|| {
                    CliError::Config(format!(
                        "reference backend spec {spec:?} must be reference:DIM:SEED"
                    ))
                })?;
                let dim: usize = dim
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad reference dim {dim:?}")))?;
                if dim < 16 {
                    return Err(CliError::Config("reference dim must be >= 16".to_string()));
                }
                let seed: u64 = seed
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad reference seed {seed:?}")))?;
                Ok(BackendSpec::Reference { dim, seed })
            }
            other => Err(CliError::Config(format!(
                "unknown backend scheme {other:?} (expected http, stdio, precomputed, or reference)"
            ))),
        }
    }

    fn build(&self) -> Result<Box<dyn EmbeddingBackend<f64>>, CliError> {
        Ok(match self {
            BackendSpec::Http { url, max_chars } => Box::new(HttpBackend::new(url, *max_chars)),
            BackendSpec::Stdio { command } => Box::new(StdioBackend::spawn(command)?),
            BackendSpec::Precomputed { path } => Box::new(PrecomputedBackend::load(path)?),
            BackendSpec::Reference { dim, seed } => Box::new(reference_embedder(*dim, *seed)),
        })
    }
}

/// Where POS tags come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaggerSource {
    /// A serialized [`TaggerModel`] tags raw text.
    Model { path: PathBuf },
    /// The input itself is pre-tagged CoNLL-U.
    ConlluInput,
}

/// Everything one extraction or evaluation run needs.
///
/// Serializes to JSON and back without loss, so a saved config drives an
/// identical run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub extractor: ExtractorKind,
    pub pattern_override: Option<String>,
    pub top_n: usize,
    pub n_values: Vec<usize>,
    pub backend: Option<BackendSpec>,
    pub tagger: Option<TaggerSource>,
    pub window: usize,
    pub damping: f64,
    pub tolerance: f64,
    pub max_iter: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub stopwords_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            extractor: ExtractorKind::PatternrankPos,
            pattern_override: None,
            top_n: 20,
            n_values: vec![5, 10, 20],
            backend: None,
            tagger: None,
            window: crate::singlerank::DEFAULT_WINDOW,
            damping: crate::singlerank::DEFAULT_DAMPING,
            tolerance: crate::singlerank::DEFAULT_TOLERANCE,
            max_iter: crate::singlerank::DEFAULT_MAX_ITER,
            ngram_min: 1,
            ngram_max: 3,
            stopwords_path: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let content = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&content)
            .map_err(|e| CliError::Config(format!("cannot parse config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n < 1) {
            return Err(CliError::Config(
                "n-values must be non-empty with every cutoff >= 1".to_string(),
            ));
        }
        let max_n = self.n_values.iter().copied().max().unwrap_or(1);
        if self.top_n < max_n {
            return Err(CliError::Config(format!(
                "top-n ({}) must be >= the largest n-value ({max_n})",
                self.top_n
            )));
        }
        if !(0.0 < self.damping && self.damping < 1.0) {
            return Err(CliError::Config("damping must lie in (0, 1)".to_string()));
        }
        if self.window < 2 {
            return Err(CliError::Config("window must be >= 2".to_string()));
        }
        if self.extractor.needs_backend() && self.backend.is_none() {
            return Err(CliError::Config(format!(
                "extractor {} requires a backend; pass --backend or set {BACKEND_ENV_VAR}",
                self.extractor.name()
            )));
        }
        Ok(())
    }
}

/// How candidates are produced before scoring.
enum CandidateSource {
    Pattern(Matcher),
    Ngrams {
        min: usize,
        max: usize,
        stopwords: HashSet<String>,
    },
}

enum Method {
    Embed {
        candidates: CandidateSource,
        backend: Box<dyn EmbeddingBackend<f64>>,
    },
    SingleRank {
        matcher: Matcher,
        window: usize,
        damping: f64,
        tolerance: f64,
        max_iter: usize,
    },
}

/// A fully wired extraction pipeline, shareable across worker threads.
pub struct Pipeline {
    name: String,
    tagger: Option<TaggerModel>,
    method: Method,
}

impl Pipeline {
    pub fn from_config(config: &RunConfig) -> Result<Pipeline, CliError> {
        config.validate()?;

        let tagger = match &config.tagger {
            Some(TaggerSource::Model { path }) => Some(
                TaggerModel::load(path)
                    .map_err(|e| CliError::Config(format!("cannot load tagger model: {e}")))?,
            ),
            _ => None,
        };

        let pattern_for = |default: BuiltinPattern| -> Result<Matcher, CliError> {
            let ast = match &config.pattern_override {
                Some(src) => parse_pattern(src)?,
                None => builtin_pattern(default),
            };
            Ok(compile(&ast))
        };

        let method = match config.extractor {
            ExtractorKind::Singlerank => Method::SingleRank {
                matcher: pattern_for(BuiltinPattern::NounPhrase)?,
                window: config.window,
                damping: config.damping,
                tolerance: config.tolerance,
                max_iter: config.max_iter,
            },
            kind => {
                let backend = config
                    .backend
                    .as_ref()
                    .expect("validated above")
                    .build()?;
                let candidates = match kind {
                    ExtractorKind::PatternrankPos => {
                        CandidateSource::Pattern(pattern_for(BuiltinPattern::PatternrankPos)?)
                    }
                    ExtractorKind::PatternrankNp => {
                        CandidateSource::Pattern(pattern_for(BuiltinPattern::NounPhrase)?)
                    }
                    ExtractorKind::Ngram => CandidateSource::Ngrams {
                        min: config.ngram_min,
                        max: config.ngram_max,
                        stopwords: load_stopwords(config.stopwords_path.as_deref())?,
                    },
                    ExtractorKind::Singlerank => unreachable!(),
                };
                Method::Embed {
                    candidates,
                    backend,
                }
            }
        };

        Ok(Pipeline {
            name: config.extractor.name().to_string(),
            tagger,
            method,
        })
    }

    /// Extract the top `n` keyphrases from an already tagged document.
    pub fn extract_tagged(
        &self,
        doc: &TaggedDocument,
        n: usize,
    ) -> Result<Vec<RankedKeyphrase<f64>>, CliError> {
        let ranked = match &self.method {
            Method::Embed {
                candidates,
                backend,
            } => {
                let found = match candidates {
                    CandidateSource::Pattern(matcher) => extract_candidates(doc, matcher),
                    CandidateSource::Ngrams {
                        min,
                        max,
                        stopwords,
                    } => select_ngrams(doc, *min, *max, stopwords)?,
                };
                rank_candidates(&doc.text, &found, backend.as_ref())?
            }
            Method::SingleRank {
                matcher,
                window,
                damping,
                tolerance,
                max_iter,
            } => {
                let found = extract_candidates(doc, matcher);
                if found.is_empty() {
                    return Ok(Vec::new());
                }
                let graph = build_graph(doc, *window);
                if graph.node_count() == 0 {
                    crate::ranker::sort_and_rank(
                        found.into_iter().map(|c| (c, 0.0f64)).collect(),
                    )
                } else {
                    let scores =
                        weighted_pagerank::<f64>(&graph, *damping, *tolerance, *max_iter)?;
                    score_candidates(&found, &scores)
                }
            }
        };
        Ok(top_n(&ranked, n.max(1))?)
    }

    /// Tokenize, tag, and extract from raw text. Requires a tagger model.
    pub fn extract_text(
        &self,
        doc_id: &str,
        text: &str,
        n: usize,
    ) -> Result<Vec<RankedKeyphrase<f64>>, CliError> {
        let model = self.tagger.as_ref().ok_or_else(|| {
            CliError::Config(
                "raw-text input needs a tagger model; pass --tagger-model or use --conllu"
                    .to_string(),
            )
        })?;
        self.extract_tagged(&tag_document(doc_id, text, model), n)
    }
}

impl Extractor for Pipeline {
    fn name(&self) -> &str {
        &self.name
    }

    fn extract_top(
        &self,
        doc_id: &str,
        text: &str,
        n: usize,
    ) -> Result<Vec<String>, Box<dyn std::error::Error + Send + Sync>> {
        Ok(self
            .extract_text(doc_id, text, n)?
            .into_iter()
            .map(|r| r.candidate.normalized)
            .collect())
    }
}

fn load_stopwords(path: Option<&Path>) -> Result<HashSet<String>, CliError> {
    let Some(path) = path else {
        return Ok(HashSet::new());
    };
    let content = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read stopwords {}: {e}", path.display())))?;
    Ok(content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.to_lowercase())
        .collect())
}

// ---------------------------------------------------------------------------
// Commands

/// Train a tagger on a CoNLL-U corpus, report training accuracy, and write
/// the model. Any failure here is a usage problem (exit 2).
pub fn cmd_train_tagger(
    corpus_path: &Path,
    iterations: u32,
    seed: u64,
    out_path: &Path,
) -> Result<(), CliError> {
    let run = || -> Result<(), CliError> {
        let content = std::fs::read_to_string(corpus_path)?;
        let sentences = load_conllu_sentences(&content)?;
        let model = train_tagger(&sentences, iterations, seed)
            .map_err(|e| CliError::Io(e.to_string()))?;

        let mut correct = 0usize;
        let mut total = 0usize;
        for sentence in &sentences {
            let tokens: Vec<crate::textpipe::Token> = sentence
                .iter()
                .scan(0usize, |pos, (form, _)| {
                    let start = *pos;
                    let len = form.chars().count().max(1);
                    *pos = start + len + 1;
                    Some(crate::textpipe::Token::new(form.clone(), start, start + len))
                })
                .collect();
            for (tag, (_, gold)) in model.tag(&tokens).iter().zip(sentence) {
                total += 1;
                if &tag.penn == gold {
                    correct += 1;
                }
            }
        }
        let accuracy = if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        };

        model.save(out_path)?;
        println!(
            "trained {} iterations on {} sentences; training accuracy {:.4} ({} / {} tokens)",
            iterations,
            sentences.len(),
            accuracy,
            correct,
            total
        );
        println!("model written to {}", out_path.display());
        Ok(())
    };
    run().map_err(|e| CliError::Config(e.to_string()))
}

/// Input flavors accepted by `extract`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Text,
    Jsonl,
    Conllu,
}

impl InputFormat {
    pub fn from_name(name: &str) -> Result<InputFormat, CliError> {
        match name {
            "text" => Ok(InputFormat::Text),
            "jsonl" => Ok(InputFormat::Jsonl),
            "conllu" => Ok(InputFormat::Conllu),
            other => Err(CliError::Config(format!(
                "unknown input format {other:?} (expected text, jsonl, or conllu)"
            ))),
        }
    }

    /// Pick a format from the config and file extension when none was given.
    pub fn infer(config: &RunConfig, input: &Path) -> InputFormat {
        if matches!(config.tagger, Some(TaggerSource::ConlluInput)) {
            return InputFormat::Conllu;
        }
        match input.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => InputFormat::Jsonl,
            Some("conllu") => InputFormat::Conllu,
            _ => InputFormat::Text,
        }
    }
}

#[derive(Serialize)]
struct OutputPhrase<'a> {
    phrase: &'a str,
    score: f64,
    rank: usize,
}

#[derive(Serialize)]
struct OutputRecord<'a> {
    id: &'a str,
    keyphrases: Vec<OutputPhrase<'a>>,
}

#[derive(Deserialize)]
struct InputRecord {
    id: String,
    text: String,
}

/// Extract keyphrases from a text file, JSONL corpus, or CoNLL-U file and
/// write one JSON object per document.
pub fn cmd_extract(
    config: &RunConfig,
    input: &Path,
    format: InputFormat,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let pipeline = Pipeline::from_config(config)?;

    let documents: Vec<Doc> = match format {
        InputFormat::Conllu => {
            let content = std::fs::read_to_string(input)?;
            load_conllu(&content)?.into_iter().map(Doc::Tagged).collect()
        }
        InputFormat::Text => {
            let text = std::fs::read_to_string(input)?;
            let id = input
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("doc0")
                .to_string();
            vec![Doc::Raw { id, text }]
        }
        InputFormat::Jsonl => {
            let content = std::fs::read_to_string(input)?;
            let mut docs = Vec::new();
            for (idx, line) in content.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let record: InputRecord = serde_json::from_str(line).map_err(|_| {
                    CliError::Io(format!("malformed JSONL input at line {}", idx + 1))
                })?;
                docs.push(Doc::Raw {
                    id: record.id,
                    text: record.text,
                });
            }
            docs
        }
    };

    // Documents are independent; collect() preserves input order so output
    // bytes never depend on the worker count.
    let lines: Vec<String> = documents
        .par_iter()
        .map(|doc| {
            let (id, ranked) = match doc {
                Doc::Tagged(tagged) => (
                    tagged.doc_id.as_str(),
                    pipeline.extract_tagged(tagged, config.top_n)?,
                ),
                Doc::Raw { id, text } => {
                    (id.as_str(), pipeline.extract_text(id, text, config.top_n)?)
                }
            };
            let record = OutputRecord {
                id,
                keyphrases: ranked
                    .iter()
                    .map(|r| OutputPhrase {
                        phrase: &r.candidate.normalized,
                        score: r.score,
                        rank: r.rank,
                    })
                    .collect(),
            };
            serde_json::to_string(&record)
                .map_err(|e| CliError::Io(format!("cannot serialize output: {e}")))
        })
        .collect::<Result<_, CliError>>()?;

    let mut body = lines.join("\n");
    if !body.is_empty() {
        body.push('\n');
    }
    match output {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

enum Doc {
    Tagged(TaggedDocument),
    Raw { id: String, text: String },
}

/// Evaluate an extractor against a gold corpus (Inspec directory or JSONL
/// file) and print the report.
pub fn cmd_eval(
    config: &RunConfig,
    corpus_path: &Path,
    format: ReportFormat,
) -> Result<(), CliError> {
    let pipeline = Pipeline::from_config(config)?;
    if pipeline.tagger.is_none() {
        return Err(CliError::Config(
            "evaluation tags raw text; pass --tagger-model".to_string(),
        ));
    }

    let corpus = if corpus_path.is_dir() {
        eval::load_inspec(corpus_path)?
    } else {
        eval::load_jsonl(corpus_path)?
    };

    let report = eval::evaluate::<f64>(&corpus, &pipeline, &config.n_values)?;
    print!("{}", eval::render_report(&report, format));
    Ok(())
}

/// Serve the reference embedder over the stdio protocol: one JSON request per
/// line on stdin, one JSON response per line on stdout. Used to exercise the
/// stdio backend end to end and as a template for real adapters.
pub fn cmd_embed_stdio(dim: usize, seed: u64) -> Result<(), CliError> {
    use crate::ranker::backends::{EmbedRequest, EmbedResponse};

    if dim < 16 {
        return Err(CliError::Config("reference dim must be >= 16".to_string()));
    }
    let backend = reference_embedder(dim, seed);
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for line in std::io::BufRead::lines(stdin.lock()) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: EmbedRequest = serde_json::from_str(&line)
            .map_err(|e| CliError::Io(format!("malformed embed request: {e}")))?;
        let vectors = EmbeddingBackend::<f64>::embed_batch(&backend, &request.texts)?;
        let response = EmbedResponse {
            vectors: vectors.iter().map(|v| v.values().to_vec()).collect(),
            dim,
        };
        let encoded = serde_json::to_string(&response)
            .map_err(|e| CliError::Io(format!("cannot serialize embed response: {e}")))?;
        writeln!(out, "{encoded}")?;
        out.flush()?;
    }
    Ok(())
}
