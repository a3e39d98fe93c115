//! Label canonicalization and the two label universes: training labels with
//! their mention counts, and the evaluation label set.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical form of an entity type string.
///
/// Lowercases, turns `_` and `-` into spaces, collapses runs of whitespace
/// and trims. `"  ASTRONOMICAL_Object "` becomes `"astronomical object"`.
pub fn normalize_label(raw: &str) -> Result<String> {
    let lowered: String = raw
        .chars()
        .map(|c| if c == '_' || c == '-' { ' ' } else { c })
        .flat_map(char::to_lowercase)
        .collect();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    if out.is_empty() {
        return Err(Error::EmptyLabel);
    }
    Ok(out)
}

/// How raw label strings are turned into the keys used for matching.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    #[default]
    Normalize,
    /// Keep labels byte-for-byte; only empty strings are rejected.
    Verbatim,
}

impl LabelMode {
    pub fn apply(self, raw: &str) -> Result<String> {
        match self {
            LabelMode::Normalize => normalize_label(raw),
            LabelMode::Verbatim if raw.is_empty() => Err(Error::EmptyLabel),
            LabelMode::Verbatim => Ok(String::from(raw)),
        }
    }
}

/// Training label universe with per-type mention counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StatsRepr", into = "StatsRepr")]
pub struct LabelStats {
    counts: BTreeMap<String, u64>,
    total_mentions: u64,
}

#[derive(Serialize, Deserialize)]
struct StatsRepr {
    labels: BTreeMap<String, u64>,
}

impl TryFrom<StatsRepr> for LabelStats {
    type Error = Error;

    fn try_from(repr: StatsRepr) -> Result<Self> {
        LabelStats::from_counts(repr.labels)
    }
}

impl From<LabelStats> for StatsRepr {
    fn from(stats: LabelStats) -> Self {
        StatsRepr { labels: stats.counts }
    }
}

impl LabelStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds stats from already-canonical labels. Repeated keys are summed.
    pub fn from_counts<I, S>(counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut stats = Self::new();
        for (label, count) in counts {
            let label = label.into();
            if label.is_empty() {
                return Err(Error::EmptyLabel);
            }
            if count == 0 {
                return Err(Error::ZeroCount(label));
            }
            stats.add(label, count);
        }
        Ok(stats)
    }

    /// Like [`LabelStats::from_counts`] but canonicalizes keys first, so
    /// `"Person"` and `"person"` end up in one entry.
    pub fn from_raw_counts<I, S>(counts: I, mode: LabelMode) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut canonical = Vec::new();
        for (label, count) in counts {
            canonical.push((mode.apply(label.as_ref())?, count));
        }
        Self::from_counts(canonical)
    }

    pub(crate) fn add(&mut self, label: String, count: u64) {
        *self.counts.entry(label).or_insert(0) += count;
        self.total_mentions += count;
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn count(&self, label: &str) -> u64 {
        self.counts.get(label).copied().unwrap_or(0)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.counts.contains_key(label)
    }

    pub fn total_mentions(&self) -> u64 {
        self.total_mentions
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(l, &c)| (l.as_str(), c))
    }
}

/// Evaluation label universe: the union of all benchmark label sets, in
/// first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalLabelSet {
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    per_benchmark: Option<BTreeMap<String, Vec<String>>>,
}

impl EvalLabelSet {
    /// Labels are taken as canonical. Duplicates keep their first position.
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = Self::default();
        let mut seen = BTreeSet::new();
        for label in labels {
            let label = label.into();
            if label.is_empty() {
                return Err(Error::EmptyLabel);
            }
            if seen.insert(label.clone()) {
                set.labels.push(label);
            }
        }
        Ok(set)
    }

    pub fn from_raw<I, S>(labels: I, mode: LabelMode) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut canonical = Vec::new();
        for label in labels {
            canonical.push(mode.apply(label.as_ref())?);
        }
        Self::new(canonical)
    }

    /// Builds the union of several benchmark label sets. Benchmarks are
    /// visited in name order; each benchmark's own list is de-duplicated.
    pub fn from_benchmarks<I, N, L, S>(benchmarks: I, mode: LabelMode) -> Result<Self>
    where
        I: IntoIterator<Item = (N, L)>,
        N: Into<String>,
        L: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut per_benchmark = BTreeMap::new();
        for (name, labels) in benchmarks {
            let subset = Self::from_raw(labels, mode)?;
            per_benchmark
                .entry(name.into())
                .or_insert_with(Vec::new)
                .extend(subset.labels);
        }
        for labels in per_benchmark.values_mut() {
            let mut seen = BTreeSet::new();
            labels.retain(|l: &String| seen.insert(l.clone()));
        }
        let mut set = Self::new(per_benchmark.values().flatten().cloned())?;
        set.per_benchmark = Some(per_benchmark);
        Ok(set)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn per_benchmark(&self) -> Option<&BTreeMap<String, Vec<String>>> {
        self.per_benchmark.as_ref()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }
}
