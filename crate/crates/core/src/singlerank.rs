//! SingleRank baseline: weighted word co-occurrence graph, weighted PageRank,
//! and phrase scoring by summed word scores.

use std::collections::HashMap;

use num_traits::Float;
use thiserror::Error;

use crate::pattern::Candidate;
use crate::ranker::{sort_and_rank, RankedKeyphrase};
use crate::textpipe::{CoarseTag, TaggedDocument};

/// Published defaults for the method's parameters.
pub const DEFAULT_WINDOW: usize = 10;
pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SingleRankError {
    #[error("cannot rank an empty graph")]
    EmptyGraph,
}

/// Undirected co-occurrence graph over lowercase noun/adjective words.
///
/// No self-loops; edge weights count in-window co-occurrences and are
/// symmetric by construction. Node ids are assigned in first-appearance
/// order, which keeps every downstream iteration deterministic.
#[derive(Debug, Clone, Default)]
pub struct CooccurrenceGraph {
    words: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<HashMap<usize, u32>>,
}

impl CooccurrenceGraph {
    pub fn node_count(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Co-occurrence weight between two words (0 when absent).
    pub fn weight(&self, a: &str, b: &str) -> u32 {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.adjacency[i].get(&j).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// Insert a word (idempotent) and return its node id.
    pub fn add_node(&mut self, word: &str) -> usize {
        if let Some(&i) = self.index.get(word) {
            return i;
        }
        let i = self.words.len();
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), i);
        self.adjacency.push(HashMap::new());
        i
    }

    /// Add `weight` to the undirected edge between two words.
    ///
    /// Panics on self-loops and zero weights, which the graph forbids.
    pub fn add_edge(&mut self, a: &str, b: &str, weight: u32) {
        assert!(weight >= 1, "edge weights must be positive");
        assert_ne!(a, b, "self-loops are not allowed");
        let ia = self.add_node(a);
        let ib = self.add_node(b);
        *self.adjacency[ia].entry(ib).or_insert(0) += weight;
        *self.adjacency[ib].entry(ia).or_insert(0) += weight;
    }

    fn bump_edge(&mut self, a: usize, b: usize) {
        debug_assert_ne!(a, b);
        *self.adjacency[a].entry(b).or_insert(0) += 1;
        *self.adjacency[b].entry(a).or_insert(0) += 1;
    }

    /// Sum of a node's edge weights.
    fn strength(&self, node: usize) -> u64 {
        self.adjacency[node].values().map(|&w| w as u64).sum()
    }
}

/// Build the co-occurrence graph of a document.
///
/// Eligible words are lowercase surfaces of tokens with coarse tag `NOUN` or
/// `ADJ`; every pair of eligible tokens fewer than `window` raw token
/// positions apart adds 1 to their edge weight. Same-word pairs are skipped.
pub fn build_graph(doc: &TaggedDocument, window: usize) -> CooccurrenceGraph {
    debug_assert!(window >= 2);
    let mut graph = CooccurrenceGraph::default();

    // (raw position, node id) for eligible tokens, in document order.
    let eligible: Vec<(usize, usize)> = doc
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, (_, tag))| matches!(tag.coarse, CoarseTag::Noun | CoarseTag::Adj))
        .map(|(pos, (token, _))| {
            let id = graph.add_node(&token.surface.to_lowercase());
            (pos, id)
        })
        .collect();

    for (i, &(pos_a, node_a)) in eligible.iter().enumerate() {
        for &(pos_b, node_b) in eligible[i + 1..].iter() {
            if pos_b - pos_a >= window {
                break;
            }
            if node_a != node_b {
                graph.bump_edge(node_a, node_b);
            }
        }
    }
    graph
}

/// PageRank scores per word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordScores<F> {
    words: Vec<String>,
    scores: Vec<F>,
    index: HashMap<String, usize>,
}

impl<F: Float> WordScores<F> {
    pub fn get(&self, word: &str) -> Option<F> {
        self.index.get(word).map(|&i| self.scores[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, F)> + '_ {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.scores.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Weighted PageRank over the co-occurrence graph:
///
/// ```text
/// s(v) = (1 - d) + d * sum over neighbors u of  w(u,v) / W(u) * s(u)
/// ```
///
/// where `W(u)` is the sum of `u`'s edge weights. Iteration stops when the
/// largest absolute score change drops below `tol` or after `max_iter`
/// rounds. Isolated nodes keep score `1 - d`.
pub fn weighted_pagerank<F: Float>(
    graph: &CooccurrenceGraph,
    damping: F,
    tol: F,
    max_iter: usize,
) -> Result<WordScores<F>, SingleRankError> {
    if graph.node_count() == 0 {
        return Err(SingleRankError::EmptyGraph);
    }
    let n = graph.node_count();
    let strengths: Vec<F> = (0..n)
        .map(|v| F::from(graph.strength(v)).expect("weight sum fits the float"))
        .collect();

    let base = F::one() - damping;
    let mut scores = vec![F::one(); n];
    let mut next = vec![F::zero(); n];
    for _ in 0..max_iter {
        let mut max_delta = F::zero();
        for v in 0..n {
            let mut incoming = F::zero();
            for (&u, &w) in &graph.adjacency[v] {
                incoming = incoming
                    + F::from(w).expect("edge weight fits the float") / strengths[u] * scores[u];
            }
            next[v] = base + damping * incoming;
            let delta = (next[v] - scores[v]).abs();
            if delta > max_delta {
                max_delta = delta;
            }
        }
        std::mem::swap(&mut scores, &mut next);
        if max_delta < tol {
            break;
        }
    }

    Ok(WordScores {
        words: graph.words.clone(),
        scores,
        index: graph.index.clone(),
    })
}

/// Score candidates by the sum of their member words' PageRank scores.
///
/// Words missing from the graph contribute 0. The returned list reuses the
/// cosine ranker's ordering rules, but scores are raw sums and may exceed 1.
pub fn score_candidates<F: Float>(
    candidates: &[Candidate],
    scores: &WordScores<F>,
) -> Vec<RankedKeyphrase<F>> {
    let scored: Vec<(Candidate, F)> = candidates
        .iter()
        .map(|candidate| {
            let total = candidate
                .normalized
                .split_whitespace()
                .map(|word| scores.get(word).unwrap_or_else(F::zero))
                .fold(F::zero(), |acc, s| acc + s);
            (candidate.clone(), total)
        })
        .collect();
    sort_and_rank(scored)
}
