//! Candidate keyphrase selection: pattern-matched spans and baseline n-grams.

use std::collections::HashSet;

use indexmap::IndexMap;

use crate::textpipe::{PosTag, TaggedDocument, Token};

use super::{Matcher, PatternError};

/// A normalized candidate keyphrase with its occurrence spans.
///
/// `normalized` is lowercase, with tokens joined by single spaces except that
/// no space appears next to a hyphen token (`state - of` becomes `state-of`).
/// Occurrences are non-overlapping `[start, end)` token-index spans in
/// increasing order, and `count == occurrences.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub normalized: String,
    pub occurrences: Vec<(usize, usize)>,
    pub count: usize,
}

/// Lowercased, space-joined form of a token span, with hyphens re-joined.
pub(crate) fn normalize_span(tokens: &[(Token, PosTag)], span: (usize, usize)) -> String {
    let mut out = String::new();
    let mut prev_hyphen = true; // suppress a leading separator
    for (token, _) in &tokens[span.0..span.1] {
        if !prev_hyphen && !token.is_hyphen {
            out.push(' ');
        }
        out.push_str(&token.surface.to_lowercase());
        prev_hyphen = token.is_hyphen;
    }
    out
}

/// Merge spans that share a normalized form, preserving first-occurrence
/// order and dropping any occurrence that overlaps an earlier one of the same
/// candidate.
fn merge_spans(
    doc: &TaggedDocument,
    spans: impl IntoIterator<Item = (usize, usize)>,
) -> Vec<Candidate> {
    let mut merged: IndexMap<String, Vec<(usize, usize)>> = IndexMap::new();
    for span in spans {
        let normalized = normalize_span(&doc.tokens, span);
        let occurrences = merged.entry(normalized).or_default();
        if occurrences.last().is_none_or(|&(_, end)| span.0 >= end) {
            occurrences.push(span);
        }
    }
    merged
        .into_iter()
        .map(|(normalized, occurrences)| Candidate {
            normalized,
            count: occurrences.len(),
            occurrences,
        })
        .collect()
}

/// Extract pattern-matched candidates with leftmost-longest, non-overlapping
/// scanning: at each token index, take the longest span the matcher accepts,
/// emit it, and resume after its end.
pub fn extract_candidates(doc: &TaggedDocument, matcher: &Matcher) -> Vec<Candidate> {
    let tags = doc.coarse_tags();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        match matcher.longest_match_at(&tags, i) {
            Some(end) => {
                spans.push((i, end));
                i = end;
            }
            None => i += 1,
        }
    }
    merge_spans(doc, spans)
}

/// Select all token n-grams with `min_n <= n <= max_n` whose first and last
/// tokens are not stopwords and which contain no punctuation-only token.
///
/// Stopwords are compared against lowercased surfaces. Deduplication and
/// normalization follow [`extract_candidates`].
pub fn select_ngrams(
    doc: &TaggedDocument,
    min_n: usize,
    max_n: usize,
    stopwords: &HashSet<String>,
) -> Result<Vec<Candidate>, PatternError> {
    if min_n < 1 || min_n > max_n {
        return Err(PatternError::InvalidRange {
            min: min_n,
            max: max_n,
        });
    }

    let lowered: Vec<String> = doc
        .tokens
        .iter()
        .map(|(t, _)| t.surface.to_lowercase())
        .collect();
    let word_like: Vec<bool> = doc
        .tokens
        .iter()
        .map(|(t, _)| t.surface.chars().any(char::is_alphanumeric))
        .collect();

    let n_tokens = doc.tokens.len();
    let mut spans = Vec::new();
    for start in 0..n_tokens {
        for n in min_n..=max_n {
            let end = start + n;
            if end > n_tokens {
                break;
            }
            if !word_like[start..end].iter().all(|&w| w) {
                continue;
            }
            if stopwords.contains(&lowered[start]) || stopwords.contains(&lowered[end - 1]) {
                continue;
            }
            spans.push((start, end));
        }
    }
    Ok(merge_spans(doc, spans))
}
