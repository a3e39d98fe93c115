use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty label")]
    EmptyLabel,

    #[error("span ({start}, {end}) out of range for sentence of {tokens} tokens")]
    SpanOutOfRange {
        start: usize,
        end: usize,
        tokens: usize,
    },

    #[error("overlapping spans are not representable in CoNLL BIO")]
    OverlappingSpans,

    #[error("label count for {0:?} must be positive")]
    ZeroCount(String),

    #[error("embedding dimension must be positive")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in vector for {0:?}")]
    NonFinite(String),

    #[error("zero vector for {0:?}")]
    ZeroVector(String),

    #[error("label not embedded: {0:?}")]
    NotEmbedded(String),

    #[error("all tokens OOV: {0:?}")]
    AllTokensOov(String),

    #[error("unembeddable evaluation labels: {0:?}")]
    Unembeddable(Vec<String>),

    #[error("no training labels")]
    NoTrainingLabels,

    #[error("empty evaluation label set")]
    EmptyEvalSet,

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("rank {rank} out of range 1..={k}")]
    RankOutOfRange { rank: usize, k: usize },

    #[error("empty score map")]
    EmptyScores,

    #[error("quantiles must satisfy 0 <= lo <= hi <= 1, got ({lo}, {hi})")]
    InvalidQuantiles { lo: f64, hi: f64 },

    #[error("empty selection for thresholds [{lo}, {hi}]")]
    EmptySelection { lo: f64, hi: f64 },

    #[error("temperature must be positive and finite")]
    InvalidTemperature,

    #[error("similarity matrix has no evaluation columns")]
    NoEvalColumns,

    #[error("unknown profile {0:?}")]
    UnknownProfile(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("degenerate input")]
    DegenerateInput,

    #[error("F1 value {value} for {label:?} outside [0, 1]")]
    F1OutOfRange { label: String, value: f64 },
}
