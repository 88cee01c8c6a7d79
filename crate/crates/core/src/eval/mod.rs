//! Evaluation harness: gold corpora, exact/partial/average match metrics, and
//! macro-averaged reports.

mod corpus;
mod report;

pub use corpus::{load_inspec, load_jsonl, GoldDocument};
pub use report::{render_report, ReportFormat};

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::Float;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from corpus loading and metric computation.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold keyphrase set is empty")]
    EmptyGold,
    #[error("no keyphrase file found for document {0}")]
    MissingGold(String),
    #[error("malformed corpus line {0}")]
    MalformedLine(usize),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("extractor failed on document {doc_id}: {source}")]
    Extractor {
        doc_id: String,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}

/// A named extraction function the harness can evaluate.
///
/// `extract_top` returns up to `top_n` normalized keyphrases in rank order.
pub trait Extractor: Send + Sync {
    fn name(&self) -> &str;

    fn extract_top(
        &self,
        doc_id: &str,
        text: &str,
        top_n: usize,
    ) -> Result<Vec<String>, Box<dyn std::error::Error + Send + Sync>>;
}

/// The three matching regimes reported by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Exact,
    Partial,
    Average,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Exact, Regime::Partial, Regime::Average];

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Exact => "exact",
            Regime::Partial => "partial",
            Regime::Average => "average",
        }
    }
}

/// Precision, recall, and F1, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf<F> {
    pub precision: F,
    pub recall: F,
    pub f1: F,
}

impl<F: Float> Prf<F> {
    /// Build from precision and recall; F1 is their harmonic mean, defined as
    /// zero when both are zero.
    pub fn from_pr(precision: F, recall: F) -> Prf<F> {
        let sum = precision + recall;
        let f1 = if sum > F::zero() {
            (F::one() + F::one()) * precision * recall / sum
        } else {
            F::zero()
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }

    fn zero() -> Prf<F> {
        Prf {
            precision: F::zero(),
            recall: F::zero(),
            f1: F::zero(),
        }
    }

    fn mean_of(a: Prf<F>, b: Prf<F>) -> Prf<F> {
        let two = F::one() + F::one();
        Prf {
            precision: (a.precision + b.precision) / two,
            recall: (a.recall + b.recall) / two,
            f1: (a.f1 + b.f1) / two,
        }
    }
}

/// Exact-match precision/recall/F1 at the given cutoff list.
///
/// True positives are extracted phrases with an exact string match in the
/// gold set. Both sides must already be normalized and deduplicated; an empty
/// extraction scores zeros rather than erroring.
pub fn prf_exact<F: Float>(
    extracted_top_n: &[String],
    gold: &BTreeSet<String>,
) -> Result<Prf<F>, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    if extracted_top_n.is_empty() {
        return Ok(Prf::zero());
    }
    let extracted: HashSet<&str> = extracted_top_n.iter().map(String::as_str).collect();
    let tp = extracted
        .iter()
        .filter(|p| gold.contains(**p))
        .count();
    let precision = ratio::<F>(tp, extracted.len());
    let recall = ratio::<F>(tp, gold.len());
    Ok(Prf::from_pr(precision, recall))
}

/// Partial-match scores: both sides are converted to whitespace-split unigram
/// sets before matching. Hyphenated forms stay single unigrams.
pub fn prf_partial<F: Float>(
    extracted_top_n: &[String],
    gold: &BTreeSet<String>,
) -> Result<Prf<F>, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    let unigrams = |phrases: &mut dyn Iterator<Item = &str>| -> HashSet<String> {
        phrases
            .flat_map(str::split_whitespace)
            .map(str::to_string)
            .collect()
    };
    let extracted = unigrams(&mut extracted_top_n.iter().map(String::as_str));
    if extracted.is_empty() {
        return Ok(Prf::zero());
    }
    let gold_unigrams = unigrams(&mut gold.iter().map(String::as_str));
    let tp = extracted.intersection(&gold_unigrams).count();
    let precision = ratio::<F>(tp, extracted.len());
    let recall = ratio::<F>(tp, gold_unigrams.len());
    Ok(Prf::from_pr(precision, recall))
}

fn ratio<F: Float>(num: usize, den: usize) -> F {
    if den == 0 {
        F::zero()
    } else {
        F::from(num).expect("count fits") / F::from(den).expect("count fits")
    }
}

/// Per-(regime, N) score cells for one document or for the macro average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeScores<F> {
    pub exact: BTreeMap<usize, Prf<F>>,
    pub partial: BTreeMap<usize, Prf<F>>,
    pub average: BTreeMap<usize, Prf<F>>,
}

impl<F> Default for RegimeScores<F> {
    fn default() -> RegimeScores<F> {
        RegimeScores {
            exact: BTreeMap::new(),
            partial: BTreeMap::new(),
            average: BTreeMap::new(),
        }
    }
}

impl<F: Float> RegimeScores<F> {
    pub fn get(&self, regime: Regime, n: usize) -> Option<Prf<F>> {
        match regime {
            Regime::Exact => self.exact.get(&n).copied(),
            Regime::Partial => self.partial.get(&n).copied(),
            Regime::Average => self.average.get(&n).copied(),
        }
    }
}

/// Full evaluation output: per-document and macro-averaged scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<F> {
    pub extractor_name: String,
    pub n_values: Vec<usize>,
    pub per_document: BTreeMap<String, RegimeScores<F>>,
    pub macro_avg: RegimeScores<F>,
}

/// Run an extractor over a corpus and compute macro-averaged scores.
///
/// The extractor is invoked once per document with `max(n_values)` requested
/// phrases; each cutoff is evaluated on a prefix of that single ranked list.
/// Documents where the extractor returns nothing contribute zeros. Documents
/// are processed in parallel; the reduction is a fixed-order arithmetic mean,
/// so results do not depend on the worker count.
pub fn evaluate<F: Float + Send + Sync>(
    corpus: &[GoldDocument],
    extractor: &dyn Extractor,
    n_values: &[usize],
) -> Result<EvalReport<F>, EvalError> {
    assert!(
        !n_values.is_empty() && n_values.iter().all(|&n| n >= 1),
        "n_values must be non-empty with every cutoff >= 1"
    );
    let max_n = n_values.iter().copied().max().expect("non-empty");

    let scored: Vec<(String, RegimeScores<F>)> = corpus
        .par_iter()
        .map(|doc| {
            let phrases = extractor
                .extract_top(&doc.doc_id, &doc.text, max_n)
                .map_err(|source| EvalError::Extractor {
                    doc_id: doc.doc_id.clone(),
                    source,
                })?;
            let scores = score_document::<F>(&phrases, doc, n_values)?;
            Ok((doc.doc_id.clone(), scores))
        })
        .collect::<Result<_, EvalError>>()?;

    // Average over the document list, not the id-keyed map, so repeated ids
    // cannot skew the mean.
    let macro_avg = macro_average(scored.iter().map(|(_, s)| s), corpus.len(), n_values);

    Ok(EvalReport {
        extractor_name: extractor.name().to_string(),
        n_values: n_values.to_vec(),
        per_document: scored.into_iter().collect(),
        macro_avg,
    })
}

fn score_document<F: Float>(
    phrases: &[String],
    doc: &GoldDocument,
    n_values: &[usize],
) -> Result<RegimeScores<F>, EvalError> {
    let mut scores = RegimeScores::default();
    for &n in n_values {
        let prefix = &phrases[..phrases.len().min(n)];
        let exact = prf_exact::<F>(prefix, &doc.gold)?;
        let partial = prf_partial::<F>(prefix, &doc.gold)?;
        scores.average.insert(n, Prf::mean_of(exact, partial));
        scores.exact.insert(n, exact);
        scores.partial.insert(n, partial);
    }
    Ok(scores)
}

fn macro_average<'a, F: Float + 'a>(
    documents: impl Iterator<Item = &'a RegimeScores<F>>,
    doc_count: usize,
    n_values: &[usize],
) -> RegimeScores<F> {
    let mut sums = RegimeScores::<F>::default();
    for regime in Regime::ALL {
        for &n in n_values {
            let cell = Prf::zero();
            match regime {
                Regime::Exact => sums.exact.insert(n, cell),
                Regime::Partial => sums.partial.insert(n, cell),
                Regime::Average => sums.average.insert(n, cell),
            };
        }
    }
    for doc in documents {
        for (target, source) in [
            (&mut sums.exact, &doc.exact),
            (&mut sums.partial, &doc.partial),
            (&mut sums.average, &doc.average),
        ] {
            for (&n, prf) in source {
                let cell = target.get_mut(&n).expect("cutoff preseeded");
                cell.precision = cell.precision + prf.precision;
                cell.recall = cell.recall + prf.recall;
                cell.f1 = cell.f1 + prf.f1;
            }
        }
    }
    if doc_count > 0 {
        let count = F::from(doc_count).expect("count fits");
        for map in [&mut sums.exact, &mut sums.partial, &mut sums.average] {
            for prf in map.values_mut() {
                prf.precision = prf.precision / count;
                prf.recall = prf.recall / count;
                prf.f1 = prf.f1 / count;
            }
        }
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gold(phrases: &[&str]) -> BTreeSet<String> {
        phrases.iter().map(|s| s.to_string()).collect()
    }

    fn extracted(phrases: &[&str]) -> Vec<String> {
        phrases.iter().map(|s| s.to_string()).collect()
    }

    struct FixedExtractor;

    impl Extractor for FixedExtractor {
        fn name(&self) -> &str {
            "fixed"
        }

        fn extract_top(
            &self,
            _doc_id: &str,
            text: &str,
            top_n: usize,
        ) -> Result<Vec<String>, Box<dyn std::error::Error + Send + Sync>> {
            Ok(text
                .split(';')
                .map(|p| p.trim().to_string())
                .filter(|p| !p.is_empty())
                .take(top_n)
                .collect())
        }
    }

    #[test]
    fn exact_match_perfect_score() {
        let prf = prf_exact::<f64>(
            &extracted(&["a", "b"]),
            &gold(&["b", "a"]),
        )
        .unwrap();
        assert_eq!((prf.precision, prf.recall, prf.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn exact_match_hand_count() {
        let prf = prf_exact::<f64>(
            &extracted(&["neural networks", "grid computing"]),
            &gold(&["neural networks", "fuzzy logic", "control"]),
        )
        .unwrap();
        assert!((prf.precision - 0.5).abs() < 1e-9);
        assert!((prf.recall - 1.0 / 3.0).abs() < 1e-9);
        assert!((prf.f1 - 0.4).abs() < 1e-9);
    }

    #[test]
    fn exact_match_empty_extraction_scores_zero() {
        let prf = prf_exact::<f64>(&[], &gold(&["a"])).unwrap();
        assert_eq!((prf.precision, prf.recall, prf.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn empty_gold_is_an_error() {
        assert!(matches!(
            prf_exact::<f64>(&extracted(&["a"]), &BTreeSet::new()),
            Err(EvalError::EmptyGold)
        ));
        assert!(matches!(
            prf_partial::<f64>(&extracted(&["a"]), &BTreeSet::new()),
            Err(EvalError::EmptyGold)
        ));
    }

    #[test]
    fn partial_match_hand_count() {
        let prf = prf_partial::<f64>(
            &extracted(&["neural networks", "grid computing"]),
            &gold(&["neural networks", "fuzzy logic", "control"]),
        )
        .unwrap();
        assert!((prf.precision - 0.5).abs() < 1e-9);
        assert!((prf.recall - 0.4).abs() < 1e-9);
        assert!((prf.f1 - 4.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn partial_match_identical_unigram_sets() {
        let prf = prf_partial::<f64>(
            &extracted(&["deep nets"]),
            &gold(&["nets deep"]),
        )
        .unwrap();
        assert_eq!((prf.precision, prf.recall, prf.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn partial_match_uses_set_semantics_for_repeats() {
        let a = prf_partial::<f64>(&extracted(&["net net"]), &gold(&["net"])).unwrap();
        let b = prf_partial::<f64>(&extracted(&["net"]), &gold(&["net"])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_document_macro_equals_document_scores() {
        let corpus = vec![GoldDocument::new(
            "d1",
            "neural networks; grid computing",
            &["neural networks", "fuzzy logic", "control"],
        )];
        let report = evaluate::<f64>(&corpus, &FixedExtractor, &[2]).unwrap();
        let doc = report.per_document.get("d1").unwrap();
        assert_eq!(doc.get(Regime::Exact, 2), report.macro_avg.get(Regime::Exact, 2));
        let exact = report.macro_avg.get(Regime::Exact, 2).unwrap();
        assert!((exact.f1 - 0.4).abs() < 1e-9);
    }

    #[test]
    fn macro_average_is_arithmetic_mean() {
        // Two documents engineered to land exact F1 of 1.0 and 0.0.
        let corpus = vec![
            GoldDocument::new("d1", "alpha", &["alpha"]),
            GoldDocument::new("d2", "beta", &["gamma"]),
        ];
        let report = evaluate::<f64>(&corpus, &FixedExtractor, &[1]).unwrap();
        let exact = report.macro_avg.get(Regime::Exact, 1).unwrap();
        assert!((exact.f1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn average_regime_is_mean_of_exact_and_partial() {
        let corpus = vec![GoldDocument::new(
            "d1",
            "neural networks; grid computing",
            &["neural networks", "fuzzy logic", "control"],
        )];
        let report = evaluate::<f64>(&corpus, &FixedExtractor, &[2]).unwrap();
        let doc = report.per_document.get("d1").unwrap();
        let exact = doc.get(Regime::Exact, 2).unwrap();
        let partial = doc.get(Regime::Partial, 2).unwrap();
        let average = doc.get(Regime::Average, 2).unwrap();
        assert!((average.precision - (exact.precision + partial.precision) / 2.0).abs() < 1e-12);
        assert!((average.f1 - (exact.f1 + partial.f1) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_mean_bounds() {
        let prf = Prf::<f64>::from_pr(0.3, 0.9);
        assert!(prf.f1 >= 0.3 && prf.f1 <= 0.9);
        assert_eq!(Prf::<f64>::from_pr(0.0, 0.0).f1, 0.0);
    }
}
