//! `labelshift` subcommands.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use labelshift_core::fingerprint::{sha256_hex, stats_fingerprint};
use labelshift_core::{
    aggregate_entropy, aggregate_max, correlate_report, exact_overlap, filter_corpus,
    label_stats, log_linear_fit, partition_eval_labels, select_quantile, Aggregation, Averaging,
    Corpus, DatasetProfile, Difficulty, EmbeddingStore, EvalLabelSet, FamiliarityConfig,
    FamiliarityReport, LabelMode, LabelStats, SourceFormat, SplitSpec, Weighting,
    DEFAULT_TEMPERATURE,
};
use serde::Serialize;

use crate::conll::{parse_conll, write_conll};
use crate::error::{Error, Result};
use crate::formats::{self, RunInfo};
use crate::jsonl::{parse_jsonl_spans, write_jsonl_spans, JsonlOptions};
use crate::remote::{fetch_remote_embeddings, RemoteConfig};
use crate::vectors::{load_vector_path, write_labeled_tsv, HashingReader, VectorFormat};

#[derive(Debug, Parser)]
#[command(name = "labelshift", version, about = "Measure label shift between NER training data and zero-shot benchmarks")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count entity mentions per label in one or more corpora.
    Stats(StatsArgs),
    /// Familiarity of evaluation labels with respect to a training set.
    Familiarity(FamiliarityArgs),
    /// Exact label overlap between training and evaluation labels.
    Overlap(OverlapArgs),
    /// Select training labels for a low, medium or high shift split.
    Split(SplitArgs),
    /// Pearson correlation between per-label familiarity and F1.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CorpusFormat {
    Jsonl,
    Conll,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightingArg {
    Zipf,
    Linear,
    None,
}

fn parse_band(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(lo)?, parse(hi)?))
}

impl From<WeightingArg> for Weighting {
    fn from(w: WeightingArg) -> Self {
        match w {
            WeightingArg::Zipf => Weighting::Zipf,
            WeightingArg::Linear => Weighting::LinearDecay,
            WeightingArg::None => Weighting::Unweighted,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AverageArg {
    Labels,
    Benchmarks,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Max,
    Entropy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DifficultyArg {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProfileArg {
    Pilener,
    Nuner,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VectorFormatArg {
    Tsv,
    Word2vec,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Corpus format.
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: CorpusFormat,
    /// Token array field of JSONL records.
    #[arg(long, default_value = "tokenized_text")]
    pub tokens_field: String,
    /// Entity triple array field of JSONL records.
    #[arg(long, default_value = "ner")]
    pub entities_field: String,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    /// Match labels byte-for-byte instead of canonicalizing them.
    #[arg(long)]
    pub no_normalize: bool,
}

impl NormalizeArgs {
    fn mode(&self) -> LabelMode {
        if self.no_normalize {
            LabelMode::Verbatim
        } else {
            LabelMode::Normalize
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Label-stats JSON produced by `stats`.
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    pub train: Option<PathBuf>,
    /// Training corpus file(s); labels are counted on the fly.
    #[arg(long, alias = "in", num_args = 1..)]
    pub corpus: Vec<PathBuf>,
    #[command(flatten)]
    pub corpus_format: CorpusArgs,
}

#[derive(Debug, Args)]
pub struct EmbeddingArgs {
    /// Vector file.
    #[arg(long, conflicts_with = "endpoint", required_unless_present = "endpoint")]
    pub embeddings: Option<PathBuf>,
    /// Vector file format.
    #[arg(long, value_enum, default_value = "tsv")]
    pub embeddings_format: VectorFormatArg,
    /// Base URL of an embedding service.
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long, default_value_t = 512)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 4)]
    pub max_inflight: usize,
    /// Bearer token for the embedding service.
    #[arg(long, env = "LABELSHIFT_TOKEN", hide_env_values = true)]
    pub token: Option<String>,
    /// Write fetched vectors to this labeled TSV file.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Provider id recorded in outputs (defaults to file name + digest or endpoint).
    #[arg(long)]
    pub provider_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long = "in", required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[command(flatten)]
    pub corpus_format: CorpusArgs,
    #[command(flatten)]
    pub normalize: NormalizeArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FamiliarityArgs {
    #[command(flatten)]
    pub train: TrainArgs,
    /// Evaluation labels: JSON ({"labels": [..]} or {"benchmarks": {..}}) or one label per line.
    #[arg(long)]
    pub eval: PathBuf,
    #[command(flatten)]
    pub embeddings: EmbeddingArgs,
    #[arg(long, default_value_t = 1000)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "zipf")]
    pub weighting: WeightingArg,
    /// Comma-separated K values; one report per value.
    #[arg(long, value_delimiter = ',', conflicts_with = "k")]
    pub sweep_k: Vec<usize>,
    /// Plot-ready CSV of macro scores for a sweep.
    #[arg(long, requires = "sweep_k")]
    pub sweep_csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "labels")]
    pub average: AverageArg,
    #[command(flatten)]
    pub normalize: NormalizeArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub output_format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long)]
    pub eval: PathBuf,
    #[command(flatten)]
    pub normalize: NormalizeArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long)]
    pub eval: PathBuf,
    #[command(flatten)]
    pub embeddings: EmbeddingArgs,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long, value_enum)]
    pub difficulty: DifficultyArg,
    #[arg(long, value_enum, default_value = "pilener", conflicts_with = "quantiles")]
    pub profile: ProfileArg,
    /// Explicit quantile band `lo,hi` instead of a profile.
    #[arg(long, value_parser = parse_band)]
    pub quantiles: Option<(f64, f64)>,
    #[arg(long, default_value_t = DEFAULT_TEMPERATURE)]
    pub temperature: f64,
    /// Write the training corpus restricted to the selected labels.
    #[arg(long, requires = "corpus")]
    pub filtered_out: Option<PathBuf>,
    /// Drop sentences left without mentions after filtering.
    #[arg(long)]
    pub drop_empty: bool,
    #[command(flatten)]
    pub normalize: NormalizeArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Familiarity report JSON.
    #[arg(long)]
    pub report: PathBuf,
    /// F1 table JSON ({"source": .., "per_label": {..}}).
    #[arg(long)]
    pub f1: PathBuf,
    /// Label stats; adds a log-linear fit of F1 on mention counts.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[command(flatten)]
    pub normalize: NormalizeArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Stats(args) => cmd_stats(args),
        Command::Familiarity(args) => cmd_familiarity(args),
        Command::Overlap(args) => cmd_overlap(args),
        Command::Split(args) => cmd_split(args),
        Command::Correlate(args) => cmd_correlate(args),
    })
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::from(e).in_file(path))
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))
}

/// Writes to `out`, or stdout when absent.
fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::from(e).in_file(path)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            Ok(stdout.flush()?)
        }
    }
}

fn read_corpus(path: &Path, args: &CorpusArgs, mode: LabelMode) -> Result<(Corpus, String)> {
    let mut reader = BufReader::new(HashingReader::new(open(path)?));
    let corpus = match args.format {
        CorpusFormat::Jsonl => {
            let options = JsonlOptions {
                tokens_field: args.tokens_field.clone(),
                entities_field: args.entities_field.clone(),
                mode,
            };
            parse_jsonl_spans(&mut reader, &options)
        }
        CorpusFormat::Conll => parse_conll(&mut reader, mode).map(|p| {
            if p.repairs > 0 {
                log::warn!("{}: {} orphan I- tags read as B-", path.display(), p.repairs);
            }
            p.corpus
        }),
    }
    .map_err(|e| e.in_file(path))?;
    Ok((corpus, reader.into_inner().hex_digest()))
}

/// Reads and concatenates corpora, recording each as an input.
fn read_corpora(paths: &[PathBuf], args: &CorpusArgs, mode: LabelMode, run: &mut RunInfo) -> Result<Corpus> {
    let mut sentences = Vec::new();
    let mut format = SourceFormat::JsonlSpans;
    for path in paths {
        let (corpus, digest) = read_corpus(path, args, mode)?;
        run.input("corpus", &display(path), digest);
        format = corpus.source_format();
        sentences.extend_from_slice(corpus.sentences());
    }
    Ok(Corpus::new(sentences, format)?)
}

fn load_train(args: &TrainArgs, mode: LabelMode, run: &mut RunInfo) -> Result<(LabelStats, Option<Corpus>)> {
    match &args.train {
        Some(path) => {
            let text = read_to_string(path)?;
            let stats = formats::read_stats(text.as_bytes(), mode).map_err(|e| e.in_file(path))?;
            run.input("train_stats", &display(path), sha256_hex(text.as_bytes()));
            Ok((stats, None))
        }
        None => {
            let corpus = read_corpora(&args.corpus, &args.corpus_format, mode, run)?;
            run.option("corpus_format", format!("{:?}", args.corpus_format.format).to_lowercase());
            Ok((label_stats(&corpus), Some(corpus)))
        }
    }
}

fn load_eval(path: &Path, mode: LabelMode, run: &mut RunInfo) -> Result<EvalLabelSet> {
    let text = read_to_string(path)?;
    let eval = formats::read_eval_labels(&text, mode).map_err(|e| e.in_file(path))?;
    run.input("eval_labels", &display(path), sha256_hex(text.as_bytes()));
    Ok(eval)
}

fn load_embeddings(
    args: &EmbeddingArgs,
    stats: &LabelStats,
    eval: &EvalLabelSet,
    run: &mut RunInfo,
) -> Result<EmbeddingStore> {
    let mut store = if let Some(path) = &args.embeddings {
        let format = match args.embeddings_format {
            VectorFormatArg::Tsv => VectorFormat::LabeledTsv,
            VectorFormatArg::Word2vec => VectorFormat::Word2vecText,
        };
        let (loaded, digest) = load_vector_path(path, format)?;
        for w in &loaded.warnings {
            log::warn!("{}: {w}", path.display());
        }
        run.input("embeddings", &display(path), digest);
        loaded.store
    } else {
        let endpoint = args.endpoint.clone().expect("clap requires one embedding source");
        let mut config = RemoteConfig::new(endpoint.clone());
        config.batch_size = args.batch_size;
        config.max_inflight = args.max_inflight;
        config.token = args.token.clone();
        let mut labels: Vec<String> = stats.iter().map(|(l, _)| l.to_string()).collect();
        labels.extend(eval.labels().iter().filter(|l| !stats.contains(l)).cloned());
        let store = fetch_remote_embeddings(&config, &labels)?;
        let mut tsv = Vec::new();
        write_labeled_tsv(&store, &mut tsv)?;
        if let Some(cache) = &args.cache {
            std::fs::write(cache, &tsv).map_err(|e| Error::from(e).in_file(cache))?;
        }
        run.input("endpoint", &endpoint, sha256_hex(&tsv));
        store
    };
    if let Some(id) = &args.provider_id {
        store.set_provider_id(id.clone());
    }
    run.option("provider_id", store.provider_id());
    Ok(store)
}

pub fn cmd_stats(args: StatsArgs) -> Result<()> {
    let mode = args.normalize.mode();
    let mut run = RunInfo::new("stats");
    run.option("format", format!("{:?}", args.corpus_format.format).to_lowercase())
        .option("normalize", !args.normalize.no_normalize);
    let corpus = read_corpora(&args.input, &args.corpus_format, mode, &mut run)?;
    let stats = label_stats(&corpus);
    let mut out = Vec::new();
    formats::write_stats(&mut out, &stats, &run)?;
    emit(args.out.as_deref(), &out)
}

fn sweep_path(out: &Path, k: usize) -> PathBuf {
    let stem = out.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let name = match out.extension() {
        Some(ext) => format!("{stem}.k{k}.{}", ext.to_string_lossy()),
        None => format!("{stem}.k{k}"),
    };
    out.with_file_name(name)
}

fn render_report(report: &FamiliarityReport, run: &RunInfo, format: OutputFormat) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    match format {
        OutputFormat::Json => formats::write_report_json(&mut out, report, run)?,
        OutputFormat::Csv => formats::write_report_csv(&mut out, report, run)?,
    }
    Ok(out)
}

pub fn cmd_familiarity(args: FamiliarityArgs) -> Result<()> {
    let mode = args.normalize.mode();
    let mut run = RunInfo::new("familiarity");
    let (stats, _) = load_train(&args.train, mode, &mut run)?;
    let eval = load_eval(&args.eval, mode, &mut run)?;
    let store = load_embeddings(&args.embeddings, &stats, &eval, &mut run)?;

    let weighting = Weighting::from(args.weighting);
    let averaging = match args.average {
        AverageArg::Labels => Averaging::Labels,
        AverageArg::Benchmarks => Averaging::Benchmarks,
    };
    let ks = if args.sweep_k.is_empty() { vec![args.k] } else { args.sweep_k.clone() };
    let configs: Vec<FamiliarityConfig> = ks
        .iter()
        .map(|&k| FamiliarityConfig {
            k,
            weighting,
            averaging,
            provider_id: store.provider_id().into(),
        })
        .collect();
    run.option("normalize", !args.normalize.no_normalize)
        .option("weighting", weighting)
        .option("average", averaging)
        .option("k", &ks);

    let reports = crate::parallel::familiarity_sweep(&eval, &stats, &store, &configs)?;
    for report in &reports {
        if !report.skipped_train_labels.is_empty() {
            log::warn!(
                "{} training labels could not be embedded and were skipped",
                report.skipped_train_labels.len()
            );
        }
    }

    if args.sweep_k.is_empty() {
        let bytes = render_report(&reports[0], &run, args.output_format)?;
        return emit(args.out.as_deref(), &bytes);
    }
    for (k, report) in ks.iter().zip(&reports) {
        let bytes = render_report(report, &run, args.output_format)?;
        match &args.out {
            Some(out) => emit(Some(&sweep_path(out, *k)), &bytes)?,
            None => emit(None, &bytes)?,
        }
    }
    if let Some(path) = &args.sweep_csv {
        let mut csv = csv::Writer::from_writer(Vec::new());
        csv.write_record(["k", "weighting", "macro"])?;
        for (k, report) in ks.iter().zip(&reports) {
            let w = serde_json::to_value(weighting)?;
            csv.write_record([k.to_string(), w.as_str().unwrap_or_default().to_string(), report.macro_score.to_string()])?;
        }
        let bytes = csv.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        emit(Some(path), &bytes)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct OverlapBody {
    overall: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_benchmark: Option<std::collections::BTreeMap<String, f64>>,
    eval_labels: usize,
    train_labels: usize,
    overlapping: Vec<String>,
    zero_shot: Vec<String>,
    train_fingerprint: String,
}

pub fn cmd_overlap(args: OverlapArgs) -> Result<()> {
    let mode = args.normalize.mode();
    let mut run = RunInfo::new("overlap");
    run.option("normalize", !args.normalize.no_normalize);
    let (stats, _) = load_train(&args.train, mode, &mut run)?;
    let eval = load_eval(&args.eval, mode, &mut run)?;
    let overall = exact_overlap(&eval, &stats)?;
    let per_benchmark = eval
        .per_benchmark()
        .map(|benchmarks| {
            benchmarks
                .iter()
                .filter(|(_, labels)| !labels.is_empty())
                .map(|(name, labels)| {
                    let subset = EvalLabelSet::new(labels.iter().cloned())?;
                    Ok((name.clone(), exact_overlap(&subset, &stats)?))
                })
                .collect::<Result<_>>()
        })
        .transpose()?;
    let partition = partition_eval_labels(&eval, &stats);
    let body = OverlapBody {
        overall,
        per_benchmark,
        eval_labels: eval.len(),
        train_labels: stats.len(),
        overlapping: partition.overlapping,
        zero_shot: partition.zero_shot,
        train_fingerprint: stats_fingerprint(&stats),
    };
    let mut out = Vec::new();
    formats::write_json(&mut out, &body, &run)?;
    emit(args.out.as_deref(), &out)
}

#[derive(Serialize)]
struct SplitBody<'a> {
    #[serde(flatten)]
    spec: &'a SplitSpec,
    selected_count: usize,
    scored_labels: usize,
}

pub fn cmd_split(args: SplitArgs) -> Result<()> {
    let mode = args.normalize.mode();
    let mut run = RunInfo::new("split");
    let (stats, corpus) = load_train(&args.train, mode, &mut run)?;
    let eval = load_eval(&args.eval, mode, &mut run)?;
    let store = load_embeddings(&args.embeddings, &stats, &eval, &mut run)?;

    let method = match args.method {
        MethodArg::Max => Aggregation::MaxSim,
        MethodArg::Entropy => Aggregation::Entropy,
    };
    let difficulty = match args.difficulty {
        DifficultyArg::Low => Difficulty::LowShift,
        DifficultyArg::Medium => Difficulty::MediumShift,
        DifficultyArg::High => Difficulty::HighShift,
    };
    let (lo, hi) = match args.quantiles {
        Some(band) => band,
        None => {
            let profile = match args.profile {
                ProfileArg::Pilener => DatasetProfile::PileNerLike,
                ProfileArg::Nuner => DatasetProfile::NuNerLike,
            };
            run.option("profile", profile);
            profile.quantiles(method, difficulty)
        }
    };
    run.option("normalize", !args.normalize.no_normalize)
        .option("method", method)
        .option("difficulty", difficulty)
        .option("quantiles", (lo, hi));

    let matrix = crate::parallel::similarity_matrix(&stats, &eval, &store)?;
    let scores = match method {
        Aggregation::MaxSim => aggregate_max(&matrix)?,
        Aggregation::Entropy => {
            run.option("temperature", args.temperature);
            aggregate_entropy(&matrix, args.temperature)?
        }
    };
    let selection = select_quantile(&scores, lo, hi)?;
    let spec = SplitSpec::from_selection(
        &scores,
        difficulty,
        selection,
        store.provider_id(),
        stats_fingerprint(&stats),
    );

    if let (Some(path), Some(corpus)) = (&args.filtered_out, corpus) {
        run.option("drop_empty", args.drop_empty);
        let filtered = filter_corpus(corpus, &spec, args.drop_empty);
        let mut bytes = Vec::new();
        match args.train.corpus_format.format {
            CorpusFormat::Jsonl => {
                let options = JsonlOptions {
                    tokens_field: args.train.corpus_format.tokens_field.clone(),
                    entities_field: args.train.corpus_format.entities_field.clone(),
                    mode,
                };
                write_jsonl_spans(&filtered, &mut bytes, &options)?;
            }
            CorpusFormat::Conll => write_conll(&filtered, &mut bytes)?,
        }
        emit(Some(path), &bytes)?;
    }

    let body = SplitBody {
        spec: &spec,
        selected_count: spec.selected.len(),
        scored_labels: scores.scores.len(),
    };
    let mut out = Vec::new();
    formats::write_json(&mut out, &body, &run)?;
    emit(args.out.as_deref(), &out)
}

#[derive(Serialize)]
struct PairRow<'a> {
    label: &'a str,
    familiarity: f64,
    f1: f64,
}

#[derive(Serialize)]
struct FitBody {
    slope: f64,
    intercept: f64,
    n: usize,
    r_squared: f64,
}

#[derive(Serialize)]
struct CorrelateBody<'a> {
    r: f64,
    n: usize,
    paired: Vec<PairRow<'a>>,
    only_in_report: &'a [String],
    only_in_f1: &'a [String],
    f1_source: &'a str,
    train_fingerprint: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    log_linear_fit: Option<FitBody>,
}

pub fn cmd_correlate(args: CorrelateArgs) -> Result<()> {
    let mode = args.normalize.mode();
    let mut run = RunInfo::new("correlate");
    run.option("normalize", !args.normalize.no_normalize);
    let report_text = read_to_string(&args.report)?;
    let report = formats::read_report(report_text.as_bytes()).map_err(|e| e.in_file(&args.report))?;
    run.input("report", &display(&args.report), sha256_hex(report_text.as_bytes()));
    let f1_text = read_to_string(&args.f1)?;
    let f1 = formats::read_f1(f1_text.as_bytes(), mode).map_err(|e| e.in_file(&args.f1))?;
    run.input("f1", &display(&args.f1), sha256_hex(f1_text.as_bytes()));

    let correlation = correlate_report(&report, &f1)?;

    let log_linear_fit = match &args.train {
        Some(path) => {
            let text = read_to_string(path)?;
            let stats = formats::read_stats(text.as_bytes(), mode).map_err(|e| e.in_file(path))?;
            run.input("train_stats", &display(path), sha256_hex(text.as_bytes()));
            let points: Vec<(u64, f64)> = f1
                .per_label
                .iter()
                .map(|(l, &v)| (stats.count(l), v))
                .filter(|&(c, _)| c > 0)
                .collect();
            let fit = log_linear_fit(&points)?;
            Some(FitBody {
                slope: fit.slope,
                intercept: fit.intercept,
                n: fit.n,
                r_squared: fit.r_squared,
            })
        }
        None => None,
    };

    let body = CorrelateBody {
        r: correlation.r,
        n: correlation.paired.len(),
        paired: correlation
            .paired
            .iter()
            .map(|(label, familiarity, f1)| PairRow {
                label,
                familiarity: *familiarity,
                f1: *f1,
            })
            .collect(),
        only_in_report: &correlation.only_in_report,
        only_in_f1: &correlation.only_in_f1,
        f1_source: &f1.source,
        train_fingerprint: &report.train_fingerprint,
        log_linear_fit,
    };
    let mut out = Vec::new();
    formats::write_json(&mut out, &body, &run)?;
    emit(args.out.as_deref(), &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn sweep_file_names() {
        assert_eq!(sweep_path(Path::new("out/r.json"), 100), Path::new("out/r.k100.json"));
        assert_eq!(sweep_path(Path::new("r"), 5), Path::new("r.k5"));
    }

    #[test]
    fn defaults() {
        let cli = Cli::try_parse_from([
            "labelshift", "familiarity", "--train", "s.json", "--eval", "e.json", "--embeddings", "v.tsv",
        ])
        .unwrap();
        let Command::Familiarity(args) = cli.command else { panic!() };
        assert_eq!(args.k, 1000);
        assert!(matches!(args.weighting, WeightingArg::Zipf));
    }

    #[test]
    fn one_embedding_source() {
        assert!(Cli::try_parse_from([
            "labelshift", "familiarity", "--train", "s.json", "--eval", "e.json",
        ])
        .is_err());
        assert!(Cli::try_parse_from([
            "labelshift", "familiarity", "--train", "s.json", "--eval", "e.json",
            "--embeddings", "v.tsv", "--endpoint", "http://x",
        ])
        .is_err());
    }
}
