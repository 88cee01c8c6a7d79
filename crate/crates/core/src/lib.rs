//! Keyphrase extraction toolkit.
//!
//! The pipeline tokenizes a document, tags it with parts of speech, selects
//! candidate keyphrases whose tag sequences match a configurable pattern (or
//! plain n-grams), and ranks the candidates by embedding similarity to the
//! document. A weighted-PageRank baseline and a macro-averaged
//! precision/recall/F1 evaluation harness round out the toolkit, and the
//! `keyrank` binary drives everything in batch.
//!
//! Numeric components (embeddings, cosine ranking, PageRank, metrics) are
//! generic over the scalar type through `num-traits`; the `*32`/`*64`
//! aliases below pin the common instantiations.
//!
//! ```
//! use keyrank::pattern::{builtin_pattern, compile, extract_candidates, BuiltinPattern};
//! use keyrank::ranker::{rank_candidates, reference_embedder};
//! use keyrank::textpipe::{tag_document, train_tagger};
//!
//! let corpus = vec![vec![
//!     ("sparse".to_string(), "JJ".to_string()),
//!     ("grids".to_string(), "NNS".to_string()),
//! ]];
//! let model = train_tagger(&corpus, 5, 1).unwrap();
//! let doc = tag_document("demo", "sparse grids", &model);
//!
//! let matcher = compile(&builtin_pattern(BuiltinPattern::PatternrankPos));
//! let candidates = extract_candidates(&doc, &matcher);
//! let backend = reference_embedder(64, 1);
//! let ranked = rank_candidates::<f64>(&doc.text, &candidates, &backend).unwrap();
//! assert_eq!(ranked[0].candidate.normalized, "sparse grids");
//! ```

pub mod cli;
pub mod eval;
pub mod pattern;
pub mod ranker;
pub mod singlerank;
pub mod textpipe;

pub use pattern::{Candidate, Matcher, PatternAst};
pub use ranker::{EmbeddingBackend, EmbeddingVector, RankedKeyphrase};
pub use textpipe::{CoarseTag, PosTag, TaggedDocument, TaggerModel, Token};

/// Single-precision embedding vector.
pub type EmbeddingVector32 = ranker::EmbeddingVector<f32>;
/// Double-precision embedding vector.
pub type EmbeddingVector64 = ranker::EmbeddingVector<f64>;
/// Single-precision ranked keyphrase.
pub type RankedKeyphrase32 = ranker::RankedKeyphrase<f32>;
/// Double-precision ranked keyphrase.
pub type RankedKeyphrase64 = ranker::RankedKeyphrase<f64>;
/// Single-precision PageRank word scores.
pub type WordScores32 = singlerank::WordScores<f32>;
/// Double-precision PageRank word scores.
pub type WordScores64 = singlerank::WordScores<f64>;
/// Single-precision precision/recall/F1 cell.
pub type Prf32 = eval::Prf<f32>;
/// Double-precision precision/recall/F1 cell.
pub type Prf64 = eval::Prf<f64>;
/// Single-precision evaluation report.
pub type EvalReport32 = eval::EvalReport<f32>;
/// Double-precision evaluation report.
pub type EvalReport64 = eval::EvalReport<f64>;
