//! Label embeddings and clipped cosine similarity.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm below which a vector is treated as zero.
pub const ZERO_NORM: f64 = 1e-12;

/// How a label string is turned into a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composition {
    /// The label is a key of the store.
    WholeString,
    /// The store holds word vectors; a label is the renormalized mean of
    /// its in-vocabulary space-separated tokens.
    TokenAverage,
}

/// Immutable-after-load map from label (or token) to unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    provider_id: String,
    composition: Composition,
    index: BTreeMap<String, usize>,
    data: Vec<f64>,
}

impl EmbeddingStore {
    pub fn new(provider_id: impl Into<String>, composition: Composition, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            dim,
            provider_id: provider_id.into(),
            composition,
            index: BTreeMap::new(),
            data: Vec::new(),
        })
    }

    /// Store keyed by whole label strings. The dimension is taken from the
    /// first vector.
    pub fn whole_string<I, S>(provider_id: impl Into<String>, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        Self::collect(provider_id.into(), Composition::WholeString, vectors)
    }

    pub fn token_average<I, S>(provider_id: impl Into<String>, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        Self::collect(provider_id.into(), Composition::TokenAverage, vectors)
    }

    fn collect<I, S>(provider_id: String, composition: Composition, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut iter = vectors.into_iter().peekable();
        let dim = iter.peek().map_or(0, |(_, v)| v.len());
        let mut store = Self::new(provider_id, composition, dim)?;
        for (key, v) in iter {
            store.insert(key, &v)?;
        }
        Ok(store)
    }

    /// Normalizes `raw` and stores it under `key`. Returns `false` and keeps
    /// the existing vector when `key` is already present.
    pub fn insert(&mut self, key: impl Into<String>, raw: &[f64]) -> Result<bool> {
        let key = key.into();
        if raw.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: raw.len(),
            });
        }
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(key));
        }
        if self.index.contains_key(&key) {
            return Ok(false);
        }
        let mut v = raw.to_vec();
        if !normalize_in_place(&mut v) {
            return Err(Error::ZeroVector(key));
        }
        self.index.insert(key, self.data.len() / self.dim);
        self.data.extend_from_slice(&v);
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provider_id(&self) -> &str {
        &self.provider_id
    }

    pub fn set_provider_id(&mut self, provider_id: impl Into<String>) {
        self.provider_id = provider_id.into();
    }

    pub fn composition(&self) -> Composition {
        self.composition
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Stored unit vector for an exact key.
    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.index
            .get(key)
            .map(|&row| &self.data[row * self.dim..(row + 1) * self.dim])
    }

    /// Entries in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.index
            .iter()
            .map(|(k, &row)| (k.as_str(), &self.data[row * self.dim..(row + 1) * self.dim]))
    }

    /// Unit vector for a canonical label under the store's composition.
    pub fn embed_label(&self, label: &str) -> Result<Vec<f64>> {
        match self.composition {
            Composition::WholeString => self
                .get(label)
                .map(<[f64]>::to_vec)
                .ok_or_else(|| Error::NotEmbedded(label.into())),
            Composition::TokenAverage => {
                let mut sum = vec![0.0; self.dim];
                let mut found = 0usize;
                for token in label.split(' ').filter(|t| !t.is_empty()) {
                    if let Some(v) = self.get(token) {
                        for (s, x) in sum.iter_mut().zip(v) {
                            *s += x;
                        }
                        found += 1;
                    }
                }
                if found == 0 {
                    return Err(Error::AllTokensOov(label.into()));
                }
                let n = found as f64;
                sum.iter_mut().for_each(|s| *s /= n);
                // Opposite token vectors can cancel exactly.
                if !normalize_in_place(&mut sum) {
                    return Err(Error::ZeroVector(label.into()));
                }
                Ok(sum)
            }
        }
    }
}

/// Scales `v` to unit L2 norm. Returns `false` for (near-)zero vectors.
pub fn normalize_in_place(v: &mut [f64]) -> bool {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if norm.is_nan() || norm < ZERO_NORM {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

/// Cosine similarity clipped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Similarity(f64);

impl Similarity {
    pub const ZERO: Similarity = Similarity(0.0);
    pub const ONE: Similarity = Similarity(1.0);

    /// Clamps into `[0, 1]`; negatives and NaN map to zero.
    pub fn clipped(raw: f64) -> Self {
        if raw > 0.0 {
            Similarity(raw.min(1.0))
        } else {
            Similarity(0.0)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `max(u·v, 0)` for unit vectors.
pub fn cosine_clipped(u: &[f64], v: &[f64]) -> Result<Similarity> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(Similarity::clipped(dot(u, v)))
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}
