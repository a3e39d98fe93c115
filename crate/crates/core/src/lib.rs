//! Label-shift measurement for zero-shot named entity recognition.
//!
//! The crate computes how familiar the entity types of an evaluation
//! benchmark are to a model fine-tuned on a given training set. Labels are
//! embedded as unit vectors, compared by clipped cosine similarity, expanded
//! by their training support and summarized by a rank-weighted average over
//! the `K` closest training mentions.
//!
//! Everything here is pure computation over in-memory data and only needs
//! `alloc`. File formats, the remote embedding client and the command-line
//! front end live in the `labelshift` crate.
//!
//! ```
//! use labelshift_core::{
//!     EmbeddingStore, EvalLabelSet, FamiliarityConfig, LabelStats, familiarity,
//! };
//!
//! let store = EmbeddingStore::whole_string(
//!     "toy",
//!     [("person", vec![1.0, 0.0]), ("musician", vec![0.6, 0.8])],
//! )
//! .unwrap();
//! let stats = LabelStats::from_counts([("person", 10)]).unwrap();
//! let eval = EvalLabelSet::new(["musician"]).unwrap();
//! let report = familiarity(&eval, &stats, &store, &FamiliarityConfig::default()).unwrap();
//! assert!((report.macro_score - 0.6).abs() < 1e-12);
//! ```

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod corpus;
pub mod embed;
mod error;
pub mod fingerprint;
pub mod label;
pub mod metric;
pub mod splits;

pub use analysis::{
    correlate_report, log_linear_fit, partition_eval_labels, pearson, Correlation, F1Table,
    Partition, RegressionFit,
};
pub use corpus::{label_stats, Corpus, Entity, Sentence, SourceFormat};
pub use embed::{cosine_clipped, Composition, EmbeddingStore, Similarity};
pub use error::{Error, Result};
pub use label::{normalize_label, EvalLabelSet, LabelMode, LabelStats};
pub use metric::{
    embed_eval_labels, exact_overlap, familiarity, familiarity_for_label, rank_similarities, weight, Averaging,
    FamiliarityConfig, FamiliarityReport, LabelScore, RankedEntry, RankedSimilarity,
    TrainingSet, Weighting,
};
pub use splits::{
    aggregate_entropy, aggregate_max, filter_corpus, make_split, quantile_sorted, row_entropy,
    select_quantile, similarity_matrix, similarity_row, AggregatedScores, Aggregation,
    DatasetProfile, Difficulty, QuantileSelection, SimilarityMatrix, SplitSpec,
    DEFAULT_TEMPERATURE, MEDIUM_BAND,
};
