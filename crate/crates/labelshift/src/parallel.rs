//! Multi-threaded versions of the per-label and per-row computations.
//! Results are identical to the sequential functions in `labelshift_core`.

use labelshift_core::metric::embed_eval_labels;
use labelshift_core::{
    similarity_row, EmbeddingStore, Error, EvalLabelSet, FamiliarityConfig, FamiliarityReport,
    LabelStats, Result, SimilarityMatrix, TrainingSet,
};
use rayon::prelude::*;

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
        .par_iter()
        .map(|v| training.score(v, config))
        .collect::<Result<Vec<_>>>()?;
    let mut config = config.clone();
    config.provider_id = store.provider_id().into();
    FamiliarityReport::assemble(eval, &scores, &training, &config)
}

/// Scores for several `K` values sharing one embedding pass.
pub fn familiarity_sweep(
    eval: &EvalLabelSet,
    stats: &LabelStats,
    store: &EmbeddingStore,
    configs: &[FamiliarityConfig],
) -> Result<Vec<FamiliarityReport>> {
    for c in configs {
        c.validate()?;
    }
    if eval.is_empty() {
        return Err(Error::EmptyEvalSet);
    }
    if stats.is_empty() {
        return Err(Error::NoTrainingLabels);
    }
    let training = TrainingSet::prepare(stats, store)?;
    let vectors = embed_eval_labels(eval, store)?;
    let ranked = vectors
        .par_iter()
        .map(|v| training.rank(v))
        .collect::<Result<Vec<_>>>()?;
    configs
        .iter()
        .map(|config| {
            let scores = ranked
                .par_iter()
                .map(|r| r.familiarity(config))
                .collect::<Result<Vec<_>>>()?;
            let mut config = config.clone();
            config.provider_id = store.provider_id().into();
            FamiliarityReport::assemble(eval, &scores, &training, &config)
        })
        .collect()
}

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
    let train: Vec<(&str, u64)> = stats.iter().collect();
    let rows = train
        .par_iter()
        .map(|(label, _)| similarity_row(&store.embed_label(label)?, &eval_vectors))
        .collect::<Result<Vec<_>>>()?;
    SimilarityMatrix::new(
        train.iter().map(|(l, _)| l.to_string()).collect(),
        eval.labels().to_vec(),
        rows.concat(),
    )
}
