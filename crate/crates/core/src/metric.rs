//! Familiarity: a support-expanded, rank-weighted average of clipped cosine
//! similarities between an evaluation label and the training labels.
//!
//! For an evaluation label every training label contributes its similarity
//! once per mention. The expanded sequence is sorted in descending order,
//! cut to its first `K` entries and averaged with rank weights `w(k)`:
//!
//! ```text
//! score = Σ_{k=1..K} s_k · w(k) / Σ_{k=1..K} w(k)
//! ```
//!
//! The expanded sequence is never built. Each training label is a run of
//! `count` equal similarities, and a run covering ranks `a+1..=b` adds
//! `s · (W(b) − W(a))` where `W` is the cumulative weight.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::embed::{cosine_clipped, EmbeddingStore};
use crate::error::{Error, Result};
use crate::fingerprint::stats_fingerprint;
use crate::label::{EvalLabelSet, LabelStats};

pub const DEFAULT_K: usize = 1000;

/// Rank-weighting scheme.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `w(k) = 1/k`
    #[default]
    Zipf,
    /// `w(k) = (K − k)/K`; the K-th rank gets weight zero.
    LinearDecay,
    /// `w(k) = 1`
    Unweighted,
}

/// What the macro score averages over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Mean over the union of evaluation labels.
    #[default]
    Labels,
    /// Mean over benchmarks of the per-benchmark label means.
    Benchmarks,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamiliarityConfig {
    pub k: usize,
    pub weighting: Weighting,
    #[serde(default)]
    pub averaging: Averaging,
    #[serde(default)]
    pub provider_id: String,
}

impl Default for FamiliarityConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            weighting: Weighting::Zipf,
            averaging: Averaging::Labels,
            provider_id: String::new(),
        }
    }
}

impl FamiliarityConfig {
    pub fn new(k: usize, weighting: Weighting) -> Self {
        Self {
            k,
            weighting,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1"));
        }
        // With K = 1 the only rank has weight (1 - 1)/1 = 0.
        if self.weighting == Weighting::LinearDecay && self.k < 2 {
            return Err(Error::InvalidConfig("linear decay needs k >= 2"));
        }
        Ok(())
    }

    /// `W(n) = Σ_{k=1..n} w(k)` for `n <= k`.
    pub fn cumulative_weight(&self, n: u64) -> f64 {
        match self.weighting {
            Weighting::Zipf => harmonic(n),
            Weighting::Unweighted => n as f64,
            Weighting::LinearDecay => {
                let k = self.k as f64;
                let n_f = n as f64;
                let triangle = (n as u128 * (n as u128 + 1) / 2) as f64;
                (n_f * k - triangle) / k
            }
        }
    }
}

/// Weight of a 1-based rank.
pub fn weight(rank: usize, config: &FamiliarityConfig) -> Result<f64> {
    if rank == 0 || rank > config.k {
        return Err(Error::RankOutOfRange {
            rank,
            k: config.k,
        });
    }
    Ok(match config.weighting {
        Weighting::Zipf => 1.0 / rank as f64,
        Weighting::Unweighted => 1.0,
        Weighting::LinearDecay => (config.k - rank) as f64 / config.k as f64,
    })
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HARMONIC_EXACT: u64 = 256;

/// `H(n)`, summed directly for small `n` and via the asymptotic expansion
/// above that (truncation error below 1e-20 there).
fn harmonic(n: u64) -> f64 {
    if n <= HARMONIC_EXACT {
        return (1..=n).map(|i| 1.0 / i as f64).sum();
    }
    let x = n as f64;
    let inv2 = 1.0 / (x * x);
    libm::log(x) + EULER_GAMMA + 0.5 / x
        - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub label: String,
    pub similarity: f64,
    pub count: u64,
}

/// Training labels ordered by similarity to one evaluation label: the
/// support-expanded sequence in run-length form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSimilarity {
    entries: Vec<RankedEntry>,
}

impl RankedSimilarity {
    /// Sorts by similarity descending, then count descending, then label.
    pub fn new(mut entries: Vec<RankedEntry>) -> Self {
        entries.sort_by(|a, b| {
            b.similarity
                .total_cmp(&a.similarity)
                .then(b.count.cmp(&a.count))
                .then_with(|| a.label.cmp(&b.label))
        });
        Self { entries }
    }

    /// Wraps entries in the given order, which must already be descending
    /// by similarity. Equal similarities may appear in any order.
    pub fn from_sorted(entries: Vec<RankedEntry>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].similarity >= w[1].similarity));
        Self { entries }
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn total_mentions(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    /// Weighted top-`min(K, mentions)` average of the expanded sequence.
    pub fn familiarity(&self, config: &FamiliarityConfig) -> Result<LabelScore> {
        config.validate()?;
        let total = self.total_mentions();
        if total == 0 {
            return Err(Error::NoTrainingLabels);
        }
        let effective_k = total.min(config.k as u64);
        let denom = config.cumulative_weight(effective_k);

        let mut score = 0.0;
        let mut consumed = 0u64;
        let mut w_before = 0.0;
        for entry in &self.entries {
            if consumed == effective_k {
                break;
            }
            let end = (consumed + entry.count).min(effective_k);
            let w_end = if end == effective_k {
                denom
            } else {
                config.cumulative_weight(end)
            };
            score += entry.similarity * ((w_end - w_before) / denom);
            consumed = end;
            w_before = w_end;
        }
        Ok(LabelScore {
            score: score.clamp(0.0, 1.0),
            effective_k,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub score: f64,
    /// Ranks actually averaged: `min(K, training mentions)`.
    pub effective_k: u64,
}

/// Training labels paired with their embeddings, prepared once and reused
/// for every evaluation label.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    entries: Vec<(String, u64, Vec<f64>)>,
    skipped: Vec<String>,
    fingerprint: String,
}

impl TrainingSet {
    /// Training labels the store cannot embed are skipped and listed in
    /// [`TrainingSet::skipped`].
    pub fn prepare(stats: &LabelStats, store: &EmbeddingStore) -> Result<Self> {
        let mut entries = Vec::with_capacity(stats.len());
        let mut skipped = Vec::new();
        for (label, count) in stats.iter() {
            match store.embed_label(label) {
                Ok(v) => entries.push((String::from(label), count, v)),
                Err(_) => skipped.push(String::from(label)),
            }
        }
        if entries.is_empty() {
            return Err(Error::NoTrainingLabels);
        }
        Ok(Self {
            entries,
            skipped,
            fingerprint: stats_fingerprint(stats),
        })
    }

    pub fn skipped(&self) -> &[String] {
        &self.skipped
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rank(&self, eval_vector: &[f64]) -> Result<RankedSimilarity> {
        let mut ranked = Vec::with_capacity(self.entries.len());
        for (label, count, v) in &self.entries {
            ranked.push(RankedEntry {
                label: label.clone(),
                similarity: cosine_clipped(eval_vector, v)?.value(),
                count: *count,
            });
        }
        Ok(RankedSimilarity::new(ranked))
    }

    pub fn score(&self, eval_vector: &[f64], config: &FamiliarityConfig) -> Result<LabelScore> {
        self.rank(eval_vector)?.familiarity(config)
    }
}

/// Training labels ranked by clipped cosine similarity to `eval_label`.
pub fn rank_similarities(
    eval_label: &str,
    stats: &LabelStats,
    store: &EmbeddingStore,
) -> Result<RankedSimilarity> {
    if stats.is_empty() {
        return Err(Error::NoTrainingLabels);
    }
    let training = TrainingSet::prepare(stats, store)?;
    training.rank(&store.embed_label(eval_label)?)
}

pub fn familiarity_for_label(
    eval_label: &str,
    stats: &LabelStats,
    store: &EmbeddingStore,
    config: &FamiliarityConfig,
) -> Result<LabelScore> {
    config.validate()?;
    rank_similarities(eval_label, stats, store)?.familiarity(config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamiliarityReport {
    pub config: FamiliarityConfig,
    #[serde(rename = "macro")]
    pub macro_score: f64,
    pub per_label: BTreeMap<String, f64>,
    pub effective_k: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_benchmark: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped_train_labels: Vec<String>,
    pub train_fingerprint: String,
}

impl FamiliarityReport {
    /// Builds a report from scores given in `eval.labels()` order.
    pub fn assemble(
        eval: &EvalLabelSet,
        scores: &[LabelScore],
        training: &TrainingSet,
        config: &FamiliarityConfig,
    ) -> Result<Self> {
        if eval.is_empty() {
            return Err(Error::EmptyEvalSet);
        }
        if scores.len() != eval.len() {
            return Err(Error::LengthMismatch(scores.len(), eval.len()));
        }
        let mut per_label = BTreeMap::new();
        let mut effective_k = BTreeMap::new();
        for (label, s) in eval.labels().iter().zip(scores) {
            per_label.insert(label.clone(), s.score);
            effective_k.insert(label.clone(), s.effective_k);
        }

        let per_benchmark = eval.per_benchmark().map(|benchmarks| {
            benchmarks
                .iter()
                .filter(|(_, labels)| !labels.is_empty())
                .map(|(name, labels)| {
                    (name.clone(), mean(labels.iter().map(|l| per_label[l])))
                })
                .collect::<BTreeMap<_, _>>()
        });

        let macro_score = match config.averaging {
            Averaging::Labels => mean(scores.iter().map(|s| s.score)),
            Averaging::Benchmarks => match &per_benchmark {
                Some(b) if !b.is_empty() => mean(b.values().copied()),
                _ => {
                    return Err(Error::InvalidConfig(
                        "benchmark averaging needs per-benchmark labels",
                    ))
                }
            },
        };

        Ok(Self {
            config: config.clone(),
            macro_score,
            per_label,
            effective_k,
            per_benchmark,
            skipped_train_labels: training.skipped().to_vec(),
            train_fingerprint: training.fingerprint().into(),
        })
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Familiarity of every evaluation label plus the macro average.
///
/// The report's `provider_id` is taken from the store. Evaluation labels the
/// store cannot embed are collected into a single error.
pub fn familiarity(
    eval: &EvalLabelSet,
    stats: &LabelStats,
    store: &EmbeddingStore,
    config: &FamiliarityConfig,
) -> Result<FamiliarityReport> {
    config.validate()?;
    if eval.is_empty() {
        return Err(Error::EmptyEvalSet);
    }
    if stats.is_empty() {
        return Err(Error::NoTrainingLabels);
    }
    let training = TrainingSet::prepare(stats, store)?;
    let vectors = embed_eval_labels(eval, store)?;
    let scores = vectors
        .iter()
        .map(|v| training.score(v, config))
        .collect::<Result<Vec<_>>>()?;
    let mut config = config.clone();
    config.provider_id = store.provider_id().into();
    FamiliarityReport::assemble(eval, &scores, &training, &config)
}

/// Embeds every evaluation label, reporting all failures at once.
pub fn embed_eval_labels(eval: &EvalLabelSet, store: &EmbeddingStore) -> Result<Vec<Vec<f64>>> {
    let mut vectors = Vec::with_capacity(eval.len());
    let mut missing = Vec::new();
    for label in eval.labels() {
        match store.embed_label(label) {
            Ok(v) => vectors.push(v),
            Err(_) => missing.push(label.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Unembeddable(missing));
    }
    Ok(vectors)
}

/// Fraction of evaluation labels that also occur as training labels.
pub fn exact_overlap(eval: &EvalLabelSet, stats: &LabelStats) -> Result<f64> {
    if eval.is_empty() {
        return Err(Error::EmptyEvalSet);
    }
    let shared = eval.labels().iter().filter(|l| stats.contains(l)).count();
    Ok(shared as f64 / eval.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn entry(label: &str, similarity: f64, count: u64) -> RankedEntry {
        RankedEntry {
            label: label.into(),
            similarity,
            count,
        }
    }

    #[test]
    fn weights() {
        let z = FamiliarityConfig::new(1000, Weighting::Zipf);
        assert_eq!(weight(1, &z).unwrap(), 1.0);
        assert_eq!(weight(4, &z).unwrap(), 0.25);
        let l = FamiliarityConfig::new(1000, Weighting::LinearDecay);
        assert_eq!(weight(1000, &l).unwrap(), 0.0);
        assert_eq!(weight(1, &l).unwrap(), 0.999);
        let u = FamiliarityConfig::new(1000, Weighting::Unweighted);
        assert_eq!(weight(17, &u).unwrap(), 1.0);
        assert!(weight(0, &z).is_err());
        assert!(weight(1001, &z).is_err());
    }

    #[test]
    fn cumulative_weight_matches_direct_sum() {
        for weighting in [Weighting::Zipf, Weighting::LinearDecay, Weighting::Unweighted] {
            let config = FamiliarityConfig::new(5000, weighting);
            let mut acc = 0.0;
            for n in 1..=5000u64 {
                acc += weight(n as usize, &config).unwrap();
                let w = config.cumulative_weight(n);
                assert!((w - acc).abs() <= 1e-12 * acc.max(1.0), "{weighting:?} n={n}: {w} vs {acc}");
            }
        }
    }

    #[test]
    fn harmonic_is_increasing_across_switch() {
        for n in HARMONIC_EXACT - 3..HARMONIC_EXACT + 3 {
            assert!(harmonic(n + 1) > harmonic(n));
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(FamiliarityConfig::new(0, Weighting::Zipf).validate().is_err());
        assert!(FamiliarityConfig::new(1, Weighting::LinearDecay).validate().is_err());
        assert!(FamiliarityConfig::new(2, Weighting::LinearDecay).validate().is_ok());
    }

    #[test]
    fn ranking_order() {
        let r = RankedSimilarity::new(vec![
            entry("a", 0.3, 2),
            entry("b", 0.9, 1),
            entry("d", 0.3, 5),
            entry("c", 0.3, 2),
        ]);
        let labels: Vec<_> = r.entries().iter().map(|e| e.label.as_str()).collect();
        assert_eq!(labels, ["b", "d", "a", "c"]);
    }

    #[test]
    fn worked_zipf_example() {
        let r = RankedSimilarity::new(vec![entry("a", 0.8, 2), entry("b", 0.4, 2)]);
        let s = r.familiarity(&FamiliarityConfig::new(4, Weighting::Zipf)).unwrap();
        let expected = (0.8 + 0.8 / 2.0 + 0.4 / 3.0 + 0.4 / 4.0) / (1.0 + 0.5 + 1.0 / 3.0 + 0.25);
        assert!((s.score - expected).abs() < 1e-15);
        assert!((s.score - 0.688).abs() < 1e-5);
        assert_eq!(s.effective_k, 4);
    }

    #[test]
    fn truncation_to_available_mentions() {
        let r = RankedSimilarity::new(vec![entry("a", 0.5, 1)]);
        let s = r.familiarity(&FamiliarityConfig::default()).unwrap();
        assert_eq!(s.score, 0.5);
        assert_eq!(s.effective_k, 1);

        let all_same = RankedSimilarity::new(vec![entry("x", 1.0, 2000)]);
        let s = all_same.familiarity(&FamiliarityConfig::default()).unwrap();
        assert_eq!(s.score, 1.0);
        assert_eq!(s.effective_k, 1000);
    }

    #[test]
    fn linear_decay_ignores_last_rank() {
        // K = 2: weights (1/2, 0).
        let r = RankedSimilarity::new(vec![entry("a", 0.9, 1), entry("b", 0.1, 1)]);
        let s = r.familiarity(&FamiliarityConfig::new(2, Weighting::LinearDecay)).unwrap();
        assert!((s.score - 0.9).abs() < 1e-15);
    }

    #[test]
    fn overlap_examples() {
        let stats = LabelStats::from_counts([("person", 3)]).unwrap();
        let eval = EvalLabelSet::new(["person", "place"]).unwrap();
        assert_eq!(exact_overlap(&eval, &stats).unwrap(), 0.5);
        let sub = EvalLabelSet::new(["person"]).unwrap();
        assert_eq!(exact_overlap(&sub, &stats).unwrap(), 1.0);
        let disjoint = EvalLabelSet::new(["place"]).unwrap();
        assert_eq!(exact_overlap(&disjoint, &stats).unwrap(), 0.0);
        assert_eq!(
            exact_overlap(&EvalLabelSet::default(), &stats).unwrap_err(),
            Error::EmptyEvalSet
        );
    }

    fn toy_store() -> EmbeddingStore {
        EmbeddingStore::whole_string(
            "toy",
            [
                ("person", vec![1.0, 0.0]),
                ("place", vec![0.0, 1.0]),
                ("musician", vec![0.6, 0.8]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn report_macro_and_provenance() {
        let store = toy_store();
        let stats = LabelStats::from_counts([("person", 5)]).unwrap();
        let eval = EvalLabelSet::new(["person", "place"]).unwrap();
        let report = familiarity(&eval, &stats, &store, &FamiliarityConfig::default()).unwrap();
        assert_eq!(report.per_label["person"], 1.0);
        assert_eq!(report.per_label["place"], 0.0);
        assert_eq!(report.macro_score, 0.5);
        assert_eq!(report.effective_k["person"], 5);
        assert_eq!(report.config.provider_id, "toy");
        assert_eq!(report.train_fingerprint, stats_fingerprint(&stats));

        let single = EvalLabelSet::new(["musician"]).unwrap();
        let r = familiarity(&single, &stats, &store, &FamiliarityConfig::default()).unwrap();
        assert_eq!(r.macro_score, r.per_label["musician"]);
    }

    #[test]
    fn report_errors() {
        let store = toy_store();
        let stats = LabelStats::from_counts([("person", 5)]).unwrap();
        let config = FamiliarityConfig::default();
        assert_eq!(
            familiarity(&EvalLabelSet::default(), &stats, &store, &config).unwrap_err(),
            Error::EmptyEvalSet
        );
        assert_eq!(
            familiarity(&EvalLabelSet::new(["person"]).unwrap(), &LabelStats::new(), &store, &config)
                .unwrap_err(),
            Error::NoTrainingLabels
        );
        let eval = EvalLabelSet::new(["person", "robot", "alien"]).unwrap();
        assert_eq!(
            familiarity(&eval, &stats, &store, &config).unwrap_err(),
            Error::Unembeddable(vec!["robot".into(), "alien".into()])
        );
        assert_eq!(
            rank_similarities("person", &LabelStats::new(), &store).unwrap_err(),
            Error::NoTrainingLabels
        );
    }

    #[test]
    fn unembeddable_training_labels_are_skipped() {
        let store = toy_store();
        let stats = LabelStats::from_counts([("person", 5), ("robot", 100)]).unwrap();
        let eval = EvalLabelSet::new(["person"]).unwrap();
        let report = familiarity(&eval, &stats, &store, &FamiliarityConfig::default()).unwrap();
        assert_eq!(report.per_label["person"], 1.0);
        assert_eq!(report.effective_k["person"], 5);
        assert_eq!(report.skipped_train_labels, ["robot"]);
    }

    #[test]
    fn benchmark_averaging() {
        let store = toy_store();
        let stats = LabelStats::from_counts([("person", 5)]).unwrap();
        let eval = EvalLabelSet::from_benchmarks(
            vec![("a", vec!["person"]), ("b", vec!["person", "place", "musician"])],
            crate::LabelMode::Normalize,
        )
        .unwrap();
        let mut config = FamiliarityConfig::default();
        let by_label = familiarity(&eval, &stats, &store, &config).unwrap();
        let per = by_label.per_benchmark.clone().unwrap();
        assert_eq!(per["a"], 1.0);
        assert!((per["b"] - 1.6 / 3.0).abs() < 1e-15);
        assert!((by_label.macro_score - 1.6 / 3.0).abs() < 1e-15);

        config.averaging = Averaging::Benchmarks;
        let by_bench = familiarity(&eval, &stats, &store, &config).unwrap();
        assert!((by_bench.macro_score - (1.0 + 1.6 / 3.0) / 2.0).abs() < 1e-15);

        let flat = EvalLabelSet::new(["person"]).unwrap();
        assert!(familiarity(&flat, &stats, &store, &config).is_err());
    }
}
