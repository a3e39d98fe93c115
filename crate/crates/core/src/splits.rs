//! Training splits of controlled label shift.
//!
//! Each training label gets one score from its row of the train × eval
//! similarity matrix, either the row maximum or the entropy of a
//! low-temperature softmax over the row. Quantile bands of those scores
//! pick the labels that make up a low, medium or high shift split.
//!
//! The two scores point in opposite directions: a high maximum similarity
//! means low shift, while a low entropy means low shift.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Sentence};
use crate::embed::{cosine_clipped, EmbeddingStore};
use crate::error::{Error, Result};
use crate::fingerprint::stats_fingerprint;
use crate::label::{EvalLabelSet, LabelStats};

pub const DEFAULT_TEMPERATURE: f64 = 0.01;

/// Clipped cosine similarities, rows = training labels, columns =
/// evaluation labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    train_labels: Vec<String>,
    eval_labels: Vec<String>,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// `values` is row-major and every entry must lie in `[0, 1]`.
    pub fn new(train_labels: Vec<String>, eval_labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let expected = train_labels.len() * eval_labels.len();
        if values.len() != expected {
            return Err(Error::LengthMismatch(values.len(), expected));
        }
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            let row = i / eval_labels.len();
            return Err(Error::NonFinite(train_labels[row].clone()));
        }
        Ok(Self {
            train_labels,
            eval_labels,
            values,
        })
    }

    pub fn train_labels(&self) -> &[String] {
        &self.train_labels
    }

    pub fn eval_labels(&self) -> &[String] {
        &self.eval_labels
    }

    pub fn rows(&self) -> usize {
        self.train_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.eval_labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols() + j]
    }
}

/// Similarities of one training vector against every evaluation vector.
pub fn similarity_row(train_vector: &[f64], eval_vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
    eval_vectors
        .iter()
        .map(|e| cosine_clipped(train_vector, e).map(|s| s.value()))
        .collect()
}

/// Rows follow the lexicographic order of training labels, columns the
/// order of the evaluation set.
pub fn similarity_matrix(
    stats: &LabelStats,
    eval: &EvalLabelSet,
    store: &EmbeddingStore,
) -> Result<SimilarityMatrix> {
    let eval_vectors = eval
        .labels()
        .iter()
        .map(|l| store.embed_label(l))
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(stats.len() * eval.len());
    let mut train_labels = Vec::with_capacity(stats.len());
    for (label, _) in stats.iter() {
        let v = store.embed_label(label)?;
        values.extend(similarity_row(&v, &eval_vectors)?);
        train_labels.push(String::from(label));
    }
    SimilarityMatrix::new(train_labels, eval.labels().to_vec(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    MaxSim,
    Entropy,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" | "max_sim" => Ok(Aggregation::MaxSim),
            "entropy" => Ok(Aggregation::Entropy),
            _ => Err(Error::InvalidConfig("aggregation must be max_sim or entropy")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedScores {
    pub method: Aggregation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    pub scores: BTreeMap<String, f64>,
}

/// Row maxima.
pub fn aggregate_max(m: &SimilarityMatrix) -> Result<AggregatedScores> {
    if m.cols() == 0 {
        return Err(Error::NoEvalColumns);
    }
    let scores = (0..m.rows())
        .map(|i| {
            let max = m.row(i).iter().copied().fold(0.0, f64::max);
            (m.train_labels[i].clone(), max)
        })
        .collect();
    Ok(AggregatedScores {
        method: Aggregation::MaxSim,
        temperature: None,
        scores,
    })
}

/// Natural-log entropy of `softmax(row / temperature)`.
///
/// With `z_j = (m_j − max m) / T` and `Z = Σ exp(z_j)` the entropy is
/// `ln Z − Σ p_j z_j`, which never exponentiates a positive number and
/// yields exactly `ln n` for a constant row.
pub fn row_entropy(row: &[f64], temperature: f64) -> Result<f64> {
    if temperature.is_nan() || temperature <= 0.0 || !temperature.is_finite() {
        return Err(Error::InvalidTemperature);
    }
    if row.is_empty() {
        return Err(Error::NoEvalColumns);
    }
    if row.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateInput);
    }
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z_sum = 0.0;
    let mut weighted = 0.0;
    for &x in row {
        let z = (x - max) / temperature;
        let e = libm::exp(z);
        z_sum += e;
        weighted += e * z;
    }
    let h = libm::log(z_sum) - weighted / z_sum;
    Ok(h.clamp(0.0, libm::log(row.len() as f64)))
}

pub fn aggregate_entropy(m: &SimilarityMatrix, temperature: f64) -> Result<AggregatedScores> {
    if m.cols() == 0 {
        return Err(Error::NoEvalColumns);
    }
    let mut scores = BTreeMap::new();
    for i in 0..m.rows() {
        scores.insert(m.train_labels[i].clone(), row_entropy(m.row(i), temperature)?);
    }
    Ok(AggregatedScores {
        method: Aggregation::Entropy,
        temperature: Some(temperature),
        scores,
    })
}

/// Empirical quantile of sorted data with linear interpolation between
/// order statistics (`h = (n − 1) q`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileSelection {
    pub quantiles: (f64, f64),
    pub thresholds: (f64, f64),
    pub selected: BTreeSet<String>,
}

/// Labels whose score lies within the interpolated quantile thresholds,
/// both ends inclusive.
pub fn select_quantile(scores: &AggregatedScores, lo: f64, hi: f64) -> Result<QuantileSelection> {
    if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
        return Err(Error::InvalidQuantiles { lo, hi });
    }
    if scores.scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let mut sorted: Vec<f64> = scores.scores.values().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let t_lo = quantile_sorted(&sorted, lo);
    let t_hi = quantile_sorted(&sorted, hi);
    let selected: BTreeSet<String> = scores
        .scores
        .iter()
        .filter(|(_, &s)| t_lo <= s && s <= t_hi)
        .map(|(l, _)| l.clone())
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptySelection { lo: t_lo, hi: t_hi });
    }
    Ok(QuantileSelection {
        quantiles: (lo, hi),
        thresholds: (t_lo, t_hi),
        selected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    LowShift,
    MediumShift,
    HighShift,
}

impl FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" | "low_shift" => Ok(Difficulty::LowShift),
            "medium" | "medium_shift" => Ok(Difficulty::MediumShift),
            "high" | "high_shift" => Ok(Difficulty::HighShift),
            _ => Err(Error::InvalidConfig("difficulty must be low, medium or high")),
        }
    }
}

/// Quantile bands tuned to the size of the training label universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetProfile {
    /// Roughly 10⁴ training labels.
    PileNerLike,
    /// Roughly 10⁵ training labels or more; narrower tails.
    NuNerLike,
}

pub const MEDIUM_BAND: (f64, f64) = (0.495, 0.505);

impl DatasetProfile {
    pub fn quantiles(self, method: Aggregation, difficulty: Difficulty) -> (f64, f64) {
        use Aggregation::*;
        use DatasetProfile::*;
        use Difficulty::*;
        match (method, self, difficulty) {
            (_, _, MediumShift) => MEDIUM_BAND,
            (MaxSim, PileNerLike, HighShift) => (0.0, 0.05),
            (MaxSim, PileNerLike, LowShift) => (0.99, 1.0),
            (MaxSim, NuNerLike, HighShift) => (0.0, 0.005),
            (MaxSim, NuNerLike, LowShift) => (0.995, 1.0),
            (Entropy, PileNerLike, LowShift) => (0.0, 0.01),
            (Entropy, PileNerLike, HighShift) => (0.95, 1.0),
            (Entropy, NuNerLike, LowShift) => (0.0, 0.005),
            (Entropy, NuNerLike, HighShift) => (0.995, 1.0),
        }
    }
}

impl FromStr for DatasetProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pilener" | "pilener_like" | "pilener-like" => Ok(DatasetProfile::PileNerLike),
            "nuner" | "nuner_like" | "nuner-like" => Ok(DatasetProfile::NuNerLike),
            _ => Err(Error::UnknownProfile(s.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub method: Aggregation,
    pub difficulty: Difficulty,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    pub quantiles: (f64, f64),
    pub thresholds: (f64, f64),
    pub selected: BTreeSet<String>,
    pub provider_id: String,
    pub train_fingerprint: String,
}

impl SplitSpec {
    pub fn from_selection(
        scores: &AggregatedScores,
        difficulty: Difficulty,
        selection: QuantileSelection,
        provider_id: impl Into<String>,
        train_fingerprint: impl Into<String>,
    ) -> Self {
        Self {
            method: scores.method,
            difficulty,
            temperature: scores.temperature,
            quantiles: selection.quantiles,
            thresholds: selection.thresholds,
            selected: selection.selected,
            provider_id: provider_id.into(),
            train_fingerprint: train_fingerprint.into(),
        }
    }
}

/// Similarity matrix, aggregation and quantile selection in one call, with
/// the band chosen by `profile`. Entropy uses [`DEFAULT_TEMPERATURE`].
pub fn make_split(
    stats: &LabelStats,
    eval: &EvalLabelSet,
    store: &EmbeddingStore,
    method: Aggregation,
    difficulty: Difficulty,
    profile: DatasetProfile,
) -> Result<SplitSpec> {
    let m = similarity_matrix(stats, eval, store)?;
    let scores = match method {
        Aggregation::MaxSim => aggregate_max(&m)?,
        Aggregation::Entropy => aggregate_entropy(&m, DEFAULT_TEMPERATURE)?,
    };
    let (lo, hi) = profile.quantiles(method, difficulty);
    let selection = select_quantile(&scores, lo, hi)?;
    Ok(SplitSpec::from_selection(
        &scores,
        difficulty,
        selection,
        store.provider_id(),
        stats_fingerprint(stats),
    ))
}

/// Removes every mention whose label is not selected. Sentences left
/// without mentions are kept unless `drop_empty` is set.
pub fn filter_corpus(corpus: Corpus, spec: &SplitSpec, drop_empty: bool) -> Corpus {
    let format = corpus.source_format();
    let sentences: Vec<Sentence> = corpus
        .into_sentences()
        .into_iter()
        .filter_map(|mut s| {
            s.retain_entities(|e| spec.selected.contains(&e.label));
            (!drop_empty || !s.entities().is_empty()).then_some(s)
        })
        .collect();
    Corpus::new(sentences, format).expect("removing spans keeps a corpus valid")
}
