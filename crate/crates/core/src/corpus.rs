//! In-memory NER corpus model. Span ends are inclusive token indices.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::LabelStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceFormat {
    JsonlSpans,
    ConllBio,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl Entity {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Self {
        Self {
            start,
            end,
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    tokens: Vec<String>,
    entities: Vec<Entity>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>, entities: Vec<Entity>) -> Result<Self> {
        for e in &entities {
            if e.start > e.end || e.end >= tokens.len() {
                return Err(Error::SpanOutOfRange {
                    start: e.start,
                    end: e.end,
                    tokens: tokens.len(),
                });
            }
            if e.label.is_empty() {
                return Err(Error::EmptyLabel);
            }
        }
        Ok(Self { tokens, entities })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    /// True when no two spans share a token.
    pub fn spans_disjoint(&self) -> bool {
        let mut spans: Vec<(usize, usize)> =
            self.entities.iter().map(|e| (e.start, e.end)).collect();
        spans.sort_unstable();
        spans.windows(2).all(|w| w[0].1 < w[1].0)
    }

    pub(crate) fn retain_entities(&mut self, mut keep: impl FnMut(&Entity) -> bool) {
        self.entities.retain(|e| keep(e));
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    sentences: Vec<Sentence>,
    source_format: SourceFormat,
}

impl Corpus {
    /// Spans in CoNLL corpora must not overlap.
    pub fn new(sentences: Vec<Sentence>, source_format: SourceFormat) -> Result<Self> {
        if source_format == SourceFormat::ConllBio && !sentences.iter().all(Sentence::spans_disjoint)
        {
            return Err(Error::OverlappingSpans);
        }
        Ok(Self {
            sentences,
            source_format,
        })
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn source_format(&self) -> SourceFormat {
        self.source_format
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.sentences.iter().flat_map(|s| s.entities.iter())
    }

    pub(crate) fn into_sentences(self) -> Vec<Sentence> {
        self.sentences
    }
}

/// Mention counts per label across the whole corpus.
pub fn label_stats(corpus: &Corpus) -> LabelStats {
    let mut stats = LabelStats::new();
    for e in corpus.entities() {
        stats.add(e.label.clone(), 1);
    }
    stats
}
