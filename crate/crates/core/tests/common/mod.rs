//! Shared test oracles, independent of the implementations they check.
//!
//! The pattern oracle interprets a `PatternAst` directly over positions
//! instead of going through NFA compilation; the PageRank oracle runs dense
//! power iteration over an explicit matrix instead of the sparse adjacency
//! solver.

#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use keyrank::eval::{Extractor, GoldDocument};
use keyrank::pattern::{Candidate, PatternAst};
use keyrank::ranker::{BackendError, EmbeddingBackend, EmbeddingVector};
use keyrank::singlerank::CooccurrenceGraph;
use keyrank::textpipe::{CoarseTag, PosTag, TaggedDocument, Token};

// ---------------------------------------------------------------------------
// Pattern-matching oracle: direct AST interpretation.

/// Does `ast` match exactly `tags`? Empty sequences are rejected, mirroring
/// the candidate-must-have-a-token rule.
pub fn ast_accepts(ast: &PatternAst, tags: &[CoarseTag]) -> bool {
    !tags.is_empty() && match_ends(ast, tags, 0).contains(&tags.len())
}

/// All end positions `e` such that `ast` matches `tags[start..e]`.
fn match_ends(ast: &PatternAst, tags: &[CoarseTag], start: usize) -> BTreeSet<usize> {
    let mut ends = BTreeSet::new();
    match ast {
        PatternAst::Literal(tag) => {
            if tags.get(start) == Some(tag) {
                ends.insert(start + 1);
            }
        }
        PatternAst::Wildcard => {
            // One or more tokens of any tag.
            for e in (start + 1)..=tags.len() {
                ends.insert(e);
            }
        }
        PatternAst::Concat(parts) => {
            let mut positions = BTreeSet::from([start]);
            for part in parts {
                let mut next = BTreeSet::new();
                for &p in &positions {
                    next.extend(match_ends(part, tags, p));
                }
                positions = next;
                if positions.is_empty() {
                    break;
                }
            }
            ends = positions;
        }
        PatternAst::Alternation(branches) => {
            for branch in branches {
                ends.extend(match_ends(branch, tags, start));
            }
        }
        PatternAst::Repeat(child, min, max) => {
            // frontier[k] = positions reachable after exactly k child matches.
            // Any match uses at most (len - start) consuming applications; a
            // nullable child can pad with empty matches at any position, so
            // iterating to len - start + min covers every decomposition.
            let limit = tags.len() - start + *min as usize;
            let cap = match max {
                Some(max) => (*max as usize).min(limit),
                None => limit,
            };
            let mut frontier = BTreeSet::from([start]);
            if *min == 0 {
                ends.insert(start);
            }
            for k in 1..=cap {
                let mut next = BTreeSet::new();
                for &p in &frontier {
                    next.extend(match_ends(child, tags, p));
                }
                frontier = next;
                if frontier.is_empty() {
                    break;
                }
                if k >= *min as usize {
                    ends.extend(frontier.iter().copied());
                }
            }
        }
    }
    ends
}

/// Leftmost-longest non-overlapping span selection over all sub-spans,
/// testing acceptance with the AST interpreter.
pub fn oracle_extract_spans(ast: &PatternAst, tags: &[CoarseTag]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        let mut best = None;
        for j in (i + 1)..=tags.len() {
            if ast_accepts(ast, &tags[i..j]) {
                best = Some(j);
            }
        }
        match best {
            Some(j) => {
                spans.push((i, j));
                i = j;
            }
            None => i += 1,
        }
    }
    spans
}

/// Independent re-implementation of candidate normalization: lowercase,
/// space-joined, no spaces next to hyphen tokens.
pub fn oracle_normalize(doc: &TaggedDocument, span: (usize, usize)) -> String {
    let mut out = String::new();
    for (i, (token, _)) in doc.tokens[span.0..span.1].iter().enumerate() {
        let hyphen = token.surface == "-";
        if i > 0 && !hyphen && !doc.tokens[span.0 + i - 1].0.surface.eq("-") {
            out.push(' ');
        }
        out.push_str(&token.surface.to_lowercase());
    }
    out
}

/// Group oracle spans into (normalized, occurrences) candidates the same way
/// the library merges them: first-occurrence order, overlaps within one form
/// dropped.
pub fn oracle_merge(doc: &TaggedDocument, spans: &[(usize, usize)]) -> Vec<(String, Vec<(usize, usize)>)> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: std::collections::HashMap<String, Vec<(usize, usize)>> =
        std::collections::HashMap::new();
    for &span in spans {
        let form = oracle_normalize(doc, span);
        let entry = groups.entry(form.clone()).or_default();
        if entry.is_empty() {
            order.push(form);
        }
        if entry.last().is_none_or(|&(_, end)| span.0 >= end) {
            entry.push(span);
        }
    }
    order
        .into_iter()
        .map(|form| {
            let occurrences = groups.remove(&form).unwrap();
            (form, occurrences)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Random inputs for the equivalence suites.

pub fn random_tag(rng: &mut ChaCha8Rng) -> CoarseTag {
    CoarseTag::ALL[rng.gen_range(0..CoarseTag::ALL.len())]
}

pub fn random_tags(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<CoarseTag> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| random_tag(rng)).collect()
}

/// Random AST limited to DSL-expressible shapes, depth-bounded.
pub fn random_ast(rng: &mut ChaCha8Rng, depth: usize) -> PatternAst {
    let leaf = depth == 0 || rng.gen_range(0..3) == 0;
    if leaf {
        return if rng.gen_range(0..5) == 0 {
            PatternAst::Wildcard
        } else {
            PatternAst::Literal(random_tag(rng))
        };
    }
    // Singleton concats and alternations are collapsed by the parser, so the
    // generator sticks to the canonical shapes the parser can produce.
    match rng.gen_range(0..4) {
        0 => {
            let n = rng.gen_range(2..=3);
            PatternAst::Concat((0..n).map(|_| random_ast(rng, depth - 1)).collect())
        }
        1 => {
            let n = rng.gen_range(2..=3);
            PatternAst::Alternation((0..n).map(|_| random_ast(rng, depth - 1)).collect())
        }
        _ => {
            let child = Box::new(random_ast(rng, depth - 1));
            match rng.gen_range(0..3) {
                0 => PatternAst::Repeat(child, 0, Some(1)),
                1 => PatternAst::Repeat(child, 0, None),
                _ => PatternAst::Repeat(child, 1, None),
            }
        }
    }
}

/// Build a tagged document from a coarse-tag sequence. Hyphen-tagged tokens
/// get the surface `-`; other surfaces cycle through a small vocabulary so
/// duplicate normalized forms occur.
pub fn doc_from_tags(tags: &[CoarseTag]) -> TaggedDocument {
    const WORDS: [&str; 3] = ["alpha", "beta", "gamma"];
    let mut tokens = Vec::new();
    let mut pos = 0usize;
    let mut text = String::new();
    for (i, tag) in tags.iter().enumerate() {
        let (surface, penn) = match tag {
            CoarseTag::Hyph => ("-".to_string(), "HYPH"),
            CoarseTag::Noun => (WORDS[i % WORDS.len()].to_string(), "NN"),
            CoarseTag::Adj => (WORDS[i % WORDS.len()].to_string(), "JJ"),
            CoarseTag::Vbg => (WORDS[i % WORDS.len()].to_string(), "VBG"),
            CoarseTag::Vbn => (WORDS[i % WORDS.len()].to_string(), "VBN"),
            CoarseTag::Other => (WORDS[i % WORDS.len()].to_string(), "XX"),
        };
        if !text.is_empty() {
            text.push(' ');
            pos += 1;
        }
        let len = surface.chars().count();
        text.push_str(&surface);
        tokens.push((Token::new(surface, pos, pos + len), PosTag::new(penn)));
        pos += len;
    }
    TaggedDocument {
        doc_id: "oracle".to_string(),
        text,
        tokens,
    }
}

// ---------------------------------------------------------------------------
// Proptest strategies shared by the property and acceptance suites.

pub fn nonzero_vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-100.0f64..100.0, dim)
        .prop_filter("needs a clearly nonzero norm", |v| {
            v.iter().map(|x| x * x).sum::<f64>().sqrt() > 1e-3
        })
}

/// Candidate lists with unique normalized forms and distinct positions.
pub fn unique_candidates() -> impl Strategy<Value = Vec<Candidate>> {
    proptest::collection::btree_set("[a-z]{3,10}( [a-z]{3,10})?", 1..12).prop_map(|forms| {
        forms
            .into_iter()
            .enumerate()
            .map(|(i, normalized)| Candidate {
                normalized,
                occurrences: vec![(i * 3, i * 3 + 1)],
                count: 1,
            })
            .collect()
    })
}

/// Small random corpora whose texts double as the extraction source for
/// [`SplitExtractor`].
pub fn corpus_strategy() -> impl Strategy<Value = Vec<GoldDocument>> {
    let phrase = "[a-z]{2,8}( [a-z]{2,8})?";
    let doc = (
        proptest::collection::vec(phrase, 1..6),
        proptest::collection::vec(phrase, 1..6),
    );
    proptest::collection::vec(doc, 1..6).prop_map(|docs| {
        docs.into_iter()
            .enumerate()
            .map(|(i, (extracted, gold))| {
                let gold_refs: Vec<&str> = gold.iter().map(String::as_str).collect();
                GoldDocument::new(&format!("d{i}"), &extracted.join("; "), &gold_refs)
            })
            .collect()
    })
}

/// Deterministic extractor that splits the document text on semicolons.
pub struct SplitExtractor;

impl Extractor for SplitExtractor {
    fn name(&self) -> &str {
        "split"
    }

    fn extract_top(
        &self,
        _doc_id: &str,
        text: &str,
        top_n: usize,
    ) -> Result<Vec<String>, Box<dyn std::error::Error + Send + Sync>> {
        let mut seen = BTreeSet::new();
        Ok(text
            .split(';')
            .map(|p| p.trim().to_lowercase())
            .filter(|p| !p.is_empty())
            .filter(|p| seen.insert(p.clone()))
            .take(top_n)
            .collect())
    }
}

/// Backend wrapper that scales every vector by a fixed factor; with a power
/// of two the scaling is exact in floating point.
pub struct ScaledBackend<'a> {
    pub inner: &'a dyn EmbeddingBackend<f64>,
    pub factor: f64,
}

impl EmbeddingBackend<f64> for ScaledBackend<'_> {
    fn name(&self) -> &str {
        "scaled"
    }

    fn dim(&self) -> Option<usize> {
        self.inner.dim()
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector<f64>>, BackendError> {
        Ok(self
            .inner
            .embed_batch(texts)?
            .into_iter()
            .map(|v| EmbeddingVector::new(v.values().iter().map(|x| x * self.factor).collect()))
            .collect())
    }
}

// ---------------------------------------------------------------------------
// Shared tagger fixture.

/// Hand-tagged sentences covering the words the end-to-end fixtures use.
pub fn fixture_corpus() -> Vec<keyrank::textpipe::TaggedSentence> {
    let sentences: &[&[(&str, &str)]] = &[
        &[("the", "DT"), ("grid", "NN"), ("computing", "NN"), ("helps", "VBZ"), (".", ".")],
        &[("grid", "NN"), ("computing", "NN"), ("of", "IN"), ("data", "NNS"), (".", ".")],
        &[("fuzzy", "JJ"), ("logic", "NN"), ("is", "VBZ"), ("neat", "JJ"), (".", ".")],
        &[("the", "DT"), ("fuzzy", "JJ"), ("logic", "NN"), ("wins", "VBZ"), (".", ".")],
        &[("neural", "JJ"), ("networks", "NNS"), ("learn", "VBP"), ("fast", "RB"), (".", ".")],
        &[("deep", "JJ"), ("neural", "JJ"), ("networks", "NNS"), ("generalize", "VBP"), (".", ".")],
        &[("manual", "JJ"), ("tuning", "NN"), ("wastes", "VBZ"), ("time", "NN"), (".", ".")],
        &[("careful", "JJ"), ("manual", "JJ"), ("tuning", "NN"), ("helps", "VBZ"), (".", ".")],
        &[("they", "PRP"), ("beat", "VBP"), ("the", "DT"), ("baseline", "NN"), (".", ".")],
        &[("we", "PRP"), ("beat", "VBP"), ("manual", "JJ"), ("tuning", "NN"), (".", ".")],
        &[("control", "NN"), ("of", "IN"), ("systems", "NNS"), (".", ".")],
        &[("the", "DT"), ("control", "NN"), ("loop", "NN"), ("runs", "VBZ"), (".", ".")],
        &[("sparse", "JJ"), ("grids", "NNS"), ("and", "CC"), ("graphs", "NNS"), (".", ".")],
        &[("computing", "NN"), ("with", "IN"), ("grids", "NNS"), (".", ".")],
        &[("state", "NN"), ("of", "IN"), ("the", "DT"), ("art", "NN"), (".", ".")],
        &[("the", "DT"), ("art", "NN"), ("of", "IN"), ("computing", "NN"), (".", ".")],
        &[("networks", "NNS"), ("of", "IN"), ("networks", "NNS"), (".", ".")],
        &[("logic", "NN"), ("and", "CC"), ("control", "NN"), (".", ".")],
        &[("tuning", "NN"), ("the", "DT"), ("networks", "NNS"), ("helps", "VBZ"), (".", ".")],
        &[("neural", "JJ"), ("control", "NN"), ("of", "IN"), ("grid", "NN"), ("systems", "NNS"), (".", ".")],
    ];
    sentences
        .iter()
        .map(|s| {
            s.iter()
                .map(|(w, t)| (w.to_string(), t.to_string()))
                .collect()
        })
        .collect()
}

/// Train the fixture model (fixed seed, deterministic).
pub fn fixture_model() -> keyrank::textpipe::TaggerModel {
    keyrank::textpipe::train_tagger(&fixture_corpus(), 5, 13).expect("fixture corpus trains")
}

/// The fixture corpus as CoNLL-U text, usable by `train-tagger`.
pub fn fixture_corpus_conllu() -> String {
    let mut out = String::new();
    for sentence in fixture_corpus() {
        for (i, (form, tag)) in sentence.iter().enumerate() {
            out.push_str(&format!("{}\t{form}\t_\t_\t{tag}\t_\t_\t_\t_\t_\n", i + 1));
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Dense PageRank oracle.

/// Random undirected graph: `n` nodes named `w0..`, edges with weights 1..=5.
/// Returns the solver-side graph and the edge list for the oracle.
pub fn random_weighted_graph(
    rng: &mut ChaCha8Rng,
    max_nodes: usize,
) -> (CooccurrenceGraph, Vec<(usize, usize, u32)>, usize) {
    let n = rng.gen_range(1..=max_nodes);
    let mut graph = CooccurrenceGraph::default();
    for i in 0..n {
        graph.add_node(&format!("w{i}"));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_range(0..4) == 0 {
                let weight = rng.gen_range(1..=5u32);
                graph.add_edge(&format!("w{i}"), &format!("w{j}"), weight);
                edges.push((i, j, weight));
            }
        }
    }
    (graph, edges, n)
}

/// Dense power iteration over an explicit weight matrix:
/// `s(v) = (1 - d) + d * sum_u w[u][v] / strength[u] * s[u]`.
pub fn dense_pagerank_oracle(
    n: usize,
    edges: &[(usize, usize, u32)],
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let mut w = vec![vec![0.0f64; n]; n];
    for &(a, b, weight) in edges {
        w[a][b] += weight as f64;
        w[b][a] += weight as f64;
    }
    let strength: Vec<f64> = (0..n).map(|u| w[u].iter().sum()).collect();

    let mut scores = vec![1.0f64; n];
    for _ in 0..max_iter {
        let mut next = vec![0.0f64; n];
        let mut max_delta = 0.0f64;
        for v in 0..n {
            let mut acc = 0.0;
            for u in 0..n {
                if w[u][v] > 0.0 {
                    acc += w[u][v] / strength[u] * scores[u];
                }
            }
            next[v] = (1.0 - damping) + damping * acc;
            max_delta = max_delta.max((next[v] - scores[v]).abs());
        }
        scores = next;
        if max_delta < tol {
            break;
        }
    }
    scores
}
