//! Trainable averaged-perceptron POS tagger.
//!
//! Greedy left-to-right tagging with hand-rolled context features, trained by
//! the averaged-perceptron update (weights averaged over all updates). The
//! whole thing is deterministic for a fixed (corpus, iterations, seed):
//! shuffling uses a seeded ChaCha stream and every tie is broken by tag name.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{TextpipeError, Token};

const MODEL_FORMAT_VERSION: u32 = 1;
const START: [&str; 2] = ["-START-", "-START2-"];
const HYPH_TAG: &str = "HYPH";

/// One training sentence: `(surface, penn-tag)` pairs.
pub type TaggedSentence = Vec<(String, String)>;

/// A trained averaged-perceptron tagging model.
///
/// Weights are keyed by feature string, then by tag. Serialization is a
/// versioned JSON document with sorted keys, so identical models produce
/// byte-identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggerModel {
    version: u32,
    tagset: BTreeSet<String>,
    features: BTreeMap<String, BTreeMap<String, f64>>,
    seed: u64,
    iterations_trained: u32,
}

impl TaggerModel {
    /// Tags the model can emit (plus the forced `HYPH`).
    pub fn tagset(&self) -> &BTreeSet<String> {
        &self.tagset
    }

    pub fn iterations_trained(&self) -> u32 {
        self.iterations_trained
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Assign one Penn tag to every token.
    ///
    /// Hyphen tokens are tagged `HYPH` unconditionally, bypassing the model.
    /// A period token resets the tag-history features, so each document can be
    /// tagged as a single sequence.
    pub fn tag(&self, tokens: &[Token]) -> Vec<super::PosTag> {
        let surfaces: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
        let mut tags = Vec::with_capacity(tokens.len());
        let mut prev = START[0].to_string();
        let mut prev2 = START[1].to_string();
        for (i, token) in tokens.iter().enumerate() {
            let tag = if token.is_hyphen {
                HYPH_TAG.to_string()
            } else {
                let feats = extract_features(i, &surfaces, &prev, &prev2);
                self.predict(&feats)
            };
            prev2 = std::mem::replace(&mut prev, tag.clone());
            if token.surface == "." {
                prev = START[0].to_string();
                prev2 = START[1].to_string();
            }
            tags.push(super::PosTag::new(tag));
        }
        tags
    }

    /// Highest-scoring tag for a feature set; ties go to the lexicographically
    /// smallest tag so output never depends on map iteration order.
    fn predict(&self, feats: &[String]) -> String {
        let mut scores: BTreeMap<&str, f64> = BTreeMap::new();
        for feat in feats {
            if let Some(weights) = self.features.get(feat) {
                for (tag, w) in weights {
                    *scores.entry(tag.as_str()).or_insert(0.0) += w;
                }
            }
        }
        let mut best: Option<(&str, f64)> = None;
        for tag in &self.tagset {
            let score = scores.get(tag.as_str()).copied().unwrap_or(0.0);
            match best {
                Some((_, s)) if score <= s => {}
                _ => best = Some((tag, score)),
            }
        }
        best.map(|(t, _)| t.to_string()).unwrap_or_else(|| HYPH_TAG.to_string())
    }

    /// Serialize to the versioned sorted-key JSON format.
    pub fn to_json(&self) -> Result<String, TextpipeError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(content: &str) -> Result<TaggerModel, TextpipeError> {
        let model: TaggerModel = serde_json::from_str(content)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(TextpipeError::UnsupportedModelVersion(model.version));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), TextpipeError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TaggerModel, TextpipeError> {
        TaggerModel::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Accumulates raw weights plus the bookkeeping needed for averaging.
#[derive(Default)]
struct Trainer {
    weights: HashMap<String, HashMap<String, f64>>,
    totals: HashMap<(String, String), f64>,
    stamps: HashMap<(String, String), u64>,
    instances: u64,
    tagset: BTreeSet<String>,
}

impl Trainer {
    fn predict(&self, feats: &[String]) -> String {
        let mut scores: HashMap<&str, f64> = HashMap::new();
        for feat in feats {
            if let Some(weights) = self.weights.get(feat) {
                for (tag, w) in weights {
                    *scores.entry(tag.as_str()).or_insert(0.0) += w;
                }
            }
        }
        let mut best: Option<(&str, f64)> = None;
        for tag in &self.tagset {
            let score = scores.get(tag.as_str()).copied().unwrap_or(0.0);
            match best {
                Some((_, s)) if score <= s => {}
                _ => best = Some((tag, score)),
            }
        }
        best.expect("tagset is non-empty").0.to_string()
    }

    fn update(&mut self, truth: &str, guess: &str, feats: &[String]) {
        self.instances += 1;
        if truth == guess {
            return;
        }
        for feat in feats {
            self.bump(feat, truth, 1.0);
            self.bump(feat, guess, -1.0);
        }
    }

    fn bump(&mut self, feat: &str, tag: &str, delta: f64) {
        let key = (feat.to_string(), tag.to_string());
        let weight = self
            .weights
            .entry(feat.to_string())
            .or_default()
            .entry(tag.to_string())
            .or_insert(0.0);
        let stamp = self.stamps.entry(key.clone()).or_insert(0);
        *self.totals.entry(key).or_insert(0.0) += (self.instances - *stamp) as f64 * *weight;
        *stamp = self.instances;
        *weight += delta;
    }

    fn into_model(mut self, iterations: u32, seed: u64) -> TaggerModel {
        let mut features: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        if self.instances > 0 {
            for (feat, weights) in &self.weights {
                for (tag, weight) in weights {
                    let key = (feat.clone(), tag.clone());
                    let stamp = self.stamps.get(&key).copied().unwrap_or(0);
                    let total = self.totals.remove(&key).unwrap_or(0.0)
                        + (self.instances - stamp) as f64 * weight;
                    let averaged = total / self.instances as f64;
                    if averaged != 0.0 {
                        features
                            .entry(feat.clone())
                            .or_default()
                            .insert(tag.clone(), averaged);
                    }
                }
            }
        }
        TaggerModel {
            version: MODEL_FORMAT_VERSION,
            tagset: self.tagset,
            features,
            seed,
            iterations_trained: iterations,
        }
    }
}

/// Train an averaged-perceptron model on Penn-tagged sentences.
///
/// Sentence order is shuffled once per iteration with a ChaCha generator
/// seeded from `seed`, so the result is deterministic for fixed inputs.
pub fn train_tagger(
    corpus: &[TaggedSentence],
    iterations: u32,
    seed: u64,
) -> Result<TaggerModel, TextpipeError> {
    let sentences: Vec<&TaggedSentence> = corpus.iter().filter(|s| !s.is_empty()).collect();
    if sentences.is_empty() {
        return Err(TextpipeError::EmptyCorpus);
    }

    let mut trainer = Trainer::default();
    for sent in &sentences {
        for (_, tag) in sent.iter() {
            trainer.tagset.insert(tag.clone());
        }
    }
    trainer.tagset.insert(HYPH_TAG.to_string());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    for _ in 0..iterations {
        order.shuffle(&mut rng);
        for &si in &order {
            let sent = sentences[si];
            let surfaces: Vec<&str> = sent.iter().map(|(w, _)| w.as_str()).collect();
            let mut prev = START[0].to_string();
            let mut prev2 = START[1].to_string();
            for (i, (word, gold)) in sent.iter().enumerate() {
                let guess = if word == "-" {
                    HYPH_TAG.to_string()
                } else {
                    let feats = extract_features(i, &surfaces, &prev, &prev2);
                    let guess = trainer.predict(&feats);
                    trainer.update(gold, &guess, &feats);
                    guess
                };
                prev2 = std::mem::replace(&mut prev, guess);
                if word == "." {
                    prev = START[0].to_string();
                    prev2 = START[1].to_string();
                }
            }
        }
    }
    Ok(trainer.into_model(iterations, seed))
}

/// Context features for the token at `i`.
fn extract_features(i: usize, surfaces: &[&str], prev: &str, prev2: &str) -> Vec<String> {
    let word = surfaces[i];
    let lower = word.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let suffix = |n: usize| -> String {
        chars[chars.len().saturating_sub(n)..].iter().collect()
    };
    let prev_word = if i > 0 {
        surfaces[i - 1].to_lowercase()
    } else {
        START[0].to_string()
    };
    let next_word = if i + 1 < surfaces.len() {
        surfaces[i + 1].to_lowercase()
    } else {
        "-END-".to_string()
    };
    vec![
        "bias".to_string(),
        format!("word={lower}"),
        format!("suf1={}", suffix(1)),
        format!("suf2={}", suffix(2)),
        format!("suf3={}", suffix(3)),
        format!("prevtag={prev}"),
        format!("prevtags={prev2},{prev}"),
        format!("shape={}", word_shape(word)),
        format!("prevword={prev_word}"),
        format!("nextword={next_word}"),
    ]
}

fn word_shape(word: &str) -> String {
    word.chars()
        .map(|c| {
            if c.is_uppercase() {
                'X'
            } else if c.is_lowercase() {
                'x'
            } else if c.is_ascii_digit() {
                'd'
            } else {
                'c'
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textpipe::{tokenize, CoarseTag};

    fn sent(pairs: &[(&str, &str)]) -> TaggedSentence {
        pairs
            .iter()
            .map(|(w, t)| (w.to_string(), t.to_string()))
            .collect()
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(matches!(
            train_tagger(&[], 5, 1),
            Err(TextpipeError::EmptyCorpus)
        ));
    }

    #[test]
    fn memorizes_singleton_corpus() {
        let corpus = vec![sent(&[("dog", "NN")])];
        let model = train_tagger(&corpus, 5, 1).unwrap();
        let tags = model.tag(&tokenize("dog"));
        assert_eq!(tags[0].penn, "NN");
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = vec![
            sent(&[("the", "DT"), ("dog", "NN"), ("runs", "VBZ")]),
            sent(&[("a", "DT"), ("fast", "JJ"), ("dog", "NN")]),
            sent(&[("dogs", "NNS"), ("run", "VBP")]),
        ];
        let a = train_tagger(&corpus, 5, 42).unwrap().to_json().unwrap();
        let b = train_tagger(&corpus, 5, 42).unwrap().to_json().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hyphen_is_forced_regardless_of_weights() {
        let corpus = vec![sent(&[("x", "NN")])];
        let model = train_tagger(&corpus, 3, 1).unwrap();
        let tags = model.tag(&tokenize("x-x"));
        assert_eq!(tags[1].penn, "HYPH");
        assert_eq!(tags[1].coarse, CoarseTag::Hyph);
    }

    #[test]
    fn empty_token_list_tags_to_empty() {
        let corpus = vec![sent(&[("x", "NN")])];
        let model = train_tagger(&corpus, 1, 1).unwrap();
        assert!(model.tag(&[]).is_empty());
    }

    #[test]
    fn learns_adjective_noun_pattern_from_small_corpus() {
        // 20 handcrafted sentences where "fast"/"neural" appear as JJ and
        // "networks" as NNS.
        let mut corpus = Vec::new();
        let adjectives = ["fast", "neural", "deep", "sparse", "robust"];
        let nouns = ["networks", "systems", "models", "graphs"];
        for (i, adj) in adjectives.iter().enumerate() {
            for (j, noun) in nouns.iter().enumerate() {
                let mut s = sent(&[("the", "DT"), (adj, "JJ"), (noun, "NNS")]);
                if (i + j) % 2 == 0 {
                    s.push(("work".to_string(), "VBP".to_string()));
                }
                corpus.push(s);
            }
        }
        assert_eq!(corpus.len(), 20);
        let model = train_tagger(&corpus, 5, 7).unwrap();
        let tags = model.tag(&tokenize("fast neural networks"));
        let coarse: Vec<CoarseTag> = tags.iter().map(|t| t.coarse).collect();
        assert_eq!(coarse, vec![CoarseTag::Adj, CoarseTag::Adj, CoarseTag::Noun]);
    }

    #[test]
    fn serialization_round_trip_is_bit_exact() {
        let corpus = vec![
            sent(&[("alpha", "NN"), ("beta", "NN")]),
            sent(&[("gamma", "JJ"), ("delta", "NN")]),
        ];
        let model = train_tagger(&corpus, 4, 9).unwrap();
        let json = model.to_json().unwrap();
        let reloaded = TaggerModel::from_json(&json).unwrap();
        assert_eq!(model, reloaded);
        assert_eq!(json, reloaded.to_json().unwrap());
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let corpus = vec![sent(&[("x", "NN")])];
        let json = train_tagger(&corpus, 1, 1).unwrap().to_json().unwrap();
        let bumped = json.replacen("\"version\": 1", "\"version\": 99", 1);
        assert!(matches!(
            TaggerModel::from_json(&bumped),
            Err(TextpipeError::UnsupportedModelVersion(99))
        ));
    }
}
