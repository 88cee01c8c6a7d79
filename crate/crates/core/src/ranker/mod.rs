//! Embedding-similarity ranking of candidate keyphrases.
//!
//! The document and every candidate are embedded through an
//! [`EmbeddingBackend`], candidates are scored by cosine similarity to the
//! document vector, and the result is sorted best-first. All of the numeric
//! work is generic over the scalar type; see the crate root for the concrete
//! `f32`/`f64` aliases.

pub mod backends;

pub use backends::{
    reference_embedder, BackendError, EmbeddingBackend, HttpBackend, PrecomputedBackend,
    ReferenceBackend, StdioBackend,
};

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pattern::Candidate;

/// How many texts are sent to a backend per `embed_batch` call.
pub const EMBED_BATCH_SIZE: usize = 64;

/// Errors from scoring and ranking.
#[derive(Debug, Error)]
pub enum RankError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cosine similarity is undefined for an all-zero vector")]
    ZeroVector,
    #[error("top-n requires n >= 1")]
    InvalidN,
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// A fixed-length embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector<F> {
    values: Vec<F>,
}

impl<F: Float> EmbeddingVector<F> {
    pub fn new(values: Vec<F>) -> EmbeddingVector<F> {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        EmbeddingVector { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    fn norm(&self) -> F {
        self.values
            .iter()
            .fold(F::zero(), |acc, &v| acc + v * v)
            .sqrt()
    }
}

/// Cosine similarity `dot(u,v) / (|u||v|)`.
///
/// Fails on mismatched dimensions or an all-zero operand.
pub fn cosine<F: Float>(u: &EmbeddingVector<F>, v: &EmbeddingVector<F>) -> Result<F, RankError> {
    if u.dim() != v.dim() {
        return Err(RankError::DimensionMismatch {
            left: u.dim(),
            right: v.dim(),
        });
    }
    let nu = u.norm();
    let nv = v.norm();
    if nu == F::zero() || nv == F::zero() {
        return Err(RankError::ZeroVector);
    }
    let dot = u
        .values
        .iter()
        .zip(&v.values)
        .fold(F::zero(), |acc, (&a, &b)| acc + a * b);
    Ok(dot / (nu * nv))
}

/// A candidate with its similarity score and 1-based rank.
///
/// Lists are sorted by score descending; ties are broken by earlier first
/// occurrence, then by the normalized form. Scores from cosine ranking lie in
/// `[-1, 1]`; graph-based scorers reuse this shape with the bound waived.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedKeyphrase<F> {
    pub candidate: Candidate,
    pub score: F,
    pub rank: usize,
}

/// Sort scored candidates into rank order and assign ranks.
pub(crate) fn sort_and_rank<F: Float>(
    mut scored: Vec<(Candidate, F)>,
) -> Vec<RankedKeyphrase<F>> {
    scored.sort_by(|(ca, sa), (cb, sb)| {
        sb.partial_cmp(sa)
            .expect("scores are finite")
            .then_with(|| ca.occurrences[0].0.cmp(&cb.occurrences[0].0))
            .then_with(|| ca.normalized.cmp(&cb.normalized))
    });
    scored
        .into_iter()
        .enumerate()
        .map(|(i, (candidate, score))| RankedKeyphrase {
            candidate,
            score,
            rank: i + 1,
        })
        .collect()
}

/// Embed the document and all candidates, then rank candidates by cosine
/// similarity to the document.
///
/// The document text is truncated to the backend's `max_chars` hint when one
/// is declared. Candidates must already be deduplicated; each normalized form
/// is embedded exactly once, in batches of [`EMBED_BATCH_SIZE`].
pub fn rank_candidates<F: Float>(
    doc_text: &str,
    candidates: &[Candidate],
    backend: &dyn EmbeddingBackend<F>,
) -> Result<Vec<RankedKeyphrase<F>>, RankError> {
    if candidates.is_empty() {
        return Ok(Vec::new());
    }

    let doc_text = match backend.max_chars() {
        Some(limit) if doc_text.chars().count() > limit => {
            log::warn!(
                "document ({} chars) exceeds backend window; truncating to {limit} chars",
                doc_text.chars().count()
            );
            doc_text.chars().take(limit).collect::<String>()
        }
        _ => doc_text.to_string(),
    };

    let doc_vec = backend
        .embed_batch(&[doc_text])?
        .into_iter()
        .next()
        .ok_or_else(|| BackendError::Protocol("backend returned no vector for document".into()))?;

    let texts: Vec<String> = candidates.iter().map(|c| c.normalized.clone()).collect();
    let mut vectors = Vec::with_capacity(texts.len());
    for chunk in texts.chunks(EMBED_BATCH_SIZE) {
        let batch = backend.embed_batch(chunk)?;
        if batch.len() != chunk.len() {
            return Err(BackendError::Protocol(format!(
                "backend returned {} vectors for {} texts",
                batch.len(),
                chunk.len()
            ))
            .into());
        }
        vectors.extend(batch);
    }

    let one = F::one();
    let scored = candidates
        .iter()
        .zip(vectors)
        .map(|(candidate, vector)| {
            let raw = cosine(&doc_vec, &vector)?;
            // Guard against rounding drift outside [-1, 1].
            let score = raw.min(one).max(-one);
            Ok((candidate.clone(), score))
        })
        .collect::<Result<Vec<_>, RankError>>()?;

    Ok(sort_and_rank(scored))
}

/// First `min(n, len)` entries of a ranked list, order preserved.
pub fn top_n<F: Float>(
    ranked: &[RankedKeyphrase<F>],
    n: usize,
) -> Result<Vec<RankedKeyphrase<F>>, RankError> {
    if n < 1 {
        return Err(RankError::InvalidN);
    }
    Ok(ranked.iter().take(n).cloned().collect())
}
