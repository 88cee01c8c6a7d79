//! Text preprocessing: tokenization, part-of-speech tagging, and CoNLL-U ingestion.
//!
//! Raw text enters the pipeline here and leaves as a [`TaggedDocument`]: a
//! sequence of offset-carrying tokens, each paired with a Penn-style tag and
//! its coarse projection. Tags come either from a bundled trainable
//! averaged-perceptron tagger ([`TaggerModel`]) or from pre-tagged CoNLL-U
//! input ([`load_conllu`]).

mod conllu;
mod tagger;

pub use conllu::{load_conllu, load_conllu_sentences};
pub use tagger::{train_tagger, TaggedSentence, TaggerModel};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from tokenization, tagging, and corpus ingestion.
#[derive(Debug, Error)]
pub enum TextpipeError {
    /// Tagger training was given an empty corpus.
    #[error("training corpus is empty")]
    EmptyCorpus,
    /// A CoNLL-U token line did not have the expected 10 tab-separated columns.
    #[error("malformed CoNLL-U input at line {0}: expected 10 tab-separated columns")]
    MalformedConllu(usize),
    /// A serialized tagger model declares a version this build cannot read.
    #[error("unsupported tagger model version {0}")]
    UnsupportedModelVersion(u32),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}

/// The six-symbol alphabet POS patterns are matched over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoarseTag {
    Noun,
    Adj,
    Vbg,
    Vbn,
    Hyph,
    Other,
}

impl CoarseTag {
    /// Canonical projection from a Penn-Treebank-style tag.
    ///
    /// `NN*` maps to `Noun`, `JJ*` to `Adj`, `VBG`/`VBN`/`HYPH` to themselves,
    /// everything else to `Other`. Total over all strings.
    pub fn from_penn(penn: &str) -> CoarseTag {
        if penn.starts_with("NN") {
            CoarseTag::Noun
        } else if penn.starts_with("JJ") {
            CoarseTag::Adj
        } else if penn == "VBG" {
            CoarseTag::Vbg
        } else if penn == "VBN" {
            CoarseTag::Vbn
        } else if penn == "HYPH" {
            CoarseTag::Hyph
        } else {
            CoarseTag::Other
        }
    }

    /// Name as written in the pattern DSL (`NOUN`, `ADJ`, `VBG`, `VBN`, `HYPH`, `OTHER`).
    pub fn name(&self) -> &'static str {
        match self {
            CoarseTag::Noun => "NOUN",
            CoarseTag::Adj => "ADJ",
            CoarseTag::Vbg => "VBG",
            CoarseTag::Vbn => "VBN",
            CoarseTag::Hyph => "HYPH",
            CoarseTag::Other => "OTHER",
        }
    }

    /// Parse a DSL tag name back into a coarse tag.
    pub fn from_name(name: &str) -> Option<CoarseTag> {
        match name {
            "NOUN" => Some(CoarseTag::Noun),
            "ADJ" => Some(CoarseTag::Adj),
            "VBG" => Some(CoarseTag::Vbg),
            "VBN" => Some(CoarseTag::Vbn),
            "HYPH" => Some(CoarseTag::Hyph),
            "OTHER" => Some(CoarseTag::Other),
            _ => None,
        }
    }

    /// All six coarse tags, in a fixed order.
    pub const ALL: [CoarseTag; 6] = [
        CoarseTag::Noun,
        CoarseTag::Adj,
        CoarseTag::Vbg,
        CoarseTag::Vbn,
        CoarseTag::Hyph,
        CoarseTag::Other,
    ];
}

/// A Penn-style tag together with its coarse projection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosTag {
    pub penn: String,
    pub coarse: CoarseTag,
}

impl PosTag {
    pub fn new(penn: impl Into<String>) -> PosTag {
        let penn = penn.into();
        let coarse = CoarseTag::from_penn(&penn);
        PosTag { penn, coarse }
    }
}

/// One token of a document, with character offsets into the source text.
///
/// `start`/`end` are 0-based character (not byte) offsets; `surface` equals
/// the source slice `[start, end)`. `is_hyphen` is true iff the surface is
/// exactly `-`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub is_hyphen: bool,
}

impl Token {
    pub fn new(surface: impl Into<String>, start: usize, end: usize) -> Token {
        let surface = surface.into();
        let is_hyphen = surface == "-";
        Token {
            surface,
            start,
            end,
            is_hyphen,
        }
    }
}

/// A document whose tokens each carry exactly one POS tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedDocument {
    pub doc_id: String,
    pub text: String,
    pub tokens: Vec<(Token, PosTag)>,
}

impl TaggedDocument {
    /// Coarse-tag sequence of the document, in token order.
    pub fn coarse_tags(&self) -> Vec<CoarseTag> {
        self.tokens.iter().map(|(_, t)| t.coarse).collect()
    }
}

/// Split text into tokens on whitespace and punctuation.
///
/// Runs of alphanumeric characters form word tokens; every other
/// non-whitespace character becomes a single-character token. In particular a
/// hyphen-minus is always emitted as its own token, so `state-of-the-art`
/// yields the seven tokens `state`, `-`, `of`, `-`, `the`, `-`, `art`.
/// Offsets are character offsets that reconstruct the source.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word_start: Option<usize> = None;
    let mut word = String::new();

    for (pos, ch) in text.chars().enumerate() {
        if ch.is_alphanumeric() {
            if word_start.is_none() {
                word_start = Some(pos);
            }
            word.push(ch);
            continue;
        }
        if let Some(start) = word_start.take() {
            tokens.push(Token::new(std::mem::take(&mut word), start, pos));
        }
        if !ch.is_whitespace() {
            tokens.push(Token::new(ch.to_string(), pos, pos + 1));
        }
    }
    if let Some(start) = word_start {
        let end = start + word.chars().count();
        tokens.push(Token::new(word, start, end));
    }
    tokens
}

/// Tokenize and tag in one step.
pub fn tag_document(doc_id: &str, text: &str, model: &TaggerModel) -> TaggedDocument {
    let tokens = tokenize(text);
    let tags = model.tag(&tokens);
    TaggedDocument {
        doc_id: doc_id.to_string(),
        text: text.to_string(),
        tokens: tokens.into_iter().zip(tags).collect(),
    }
}
