//! JSON and CSV documents read and written by the CLI.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use labelshift_core::{
    EvalLabelSet, F1Table, FamiliarityReport, LabelMode, LabelStats, SplitSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Provenance block embedded in every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub options: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<InputFingerprint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFingerprint {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

impl RunInfo {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            options: BTreeMap::new(),
            inputs: Vec::new(),
        }
    }

    pub fn option(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.options.insert(
            key.into(),
            serde_json::to_value(value).expect("options serialize to JSON"),
        );
        self
    }

    pub fn input(&mut self, role: &str, path: &str, sha256: String) -> &mut Self {
        self.inputs.push(InputFingerprint {
            role: role.into(),
            path: path.into(),
            sha256,
        });
        self
    }
}

/// A payload plus its [`RunInfo`], serialized as one flat JSON object.
#[derive(Debug, Serialize, Deserialize)]
pub struct Document<T> {
    #[serde(flatten)]
    pub body: T,
    pub run: RunInfo,
}

pub fn write_json<W: Write, T: Serialize>(mut writer: W, body: &T, run: &RunInfo) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, &Document { body, run: run.clone() })?;
    writer.write_all(b"\n")?;
    Ok(())
}

#[derive(Deserialize)]
struct StatsFile {
    labels: BTreeMap<String, u64>,
}

/// Reads `{"labels": {"<label>": count, ..}}`. Keys are canonicalized with
/// `mode` and merged.
pub fn read_stats<R: Read>(reader: R, mode: LabelMode) -> Result<LabelStats> {
    let file: StatsFile = serde_json::from_reader(reader)?;
    Ok(LabelStats::from_raw_counts(file.labels, mode)?)
}

#[derive(Serialize)]
struct StatsBody<'a> {
    labels: &'a BTreeMap<String, u64>,
    total_mentions: u64,
    train_fingerprint: String,
}

pub fn write_stats<W: Write>(writer: W, stats: &LabelStats, run: &RunInfo) -> Result<()> {
    let body = StatsBody {
        labels: stats.counts(),
        total_mentions: stats.total_mentions(),
        train_fingerprint: labelshift_core::fingerprint::stats_fingerprint(stats),
    };
    write_json(writer, &body, run)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EvalFile {
    Benchmarks { benchmarks: BTreeMap<String, Vec<String>> },
    Flat { labels: Vec<String> },
}

/// Reads `{"labels": [..]}`, `{"benchmarks": {"<name>": [..], ..}}` or a
/// plain text file with one label per line.
pub fn read_eval_labels(text: &str, mode: LabelMode) -> Result<EvalLabelSet> {
    if text.trim_start().starts_with('{') {
        let file: EvalFile = serde_json::from_str(text)?;
        return Ok(match file {
            EvalFile::Benchmarks { benchmarks } => EvalLabelSet::from_benchmarks(benchmarks, mode)?,
            EvalFile::Flat { labels } => EvalLabelSet::from_raw(labels, mode)?,
        });
    }
    let labels = text.lines().map(str::trim).filter(|l| !l.is_empty());
    Ok(EvalLabelSet::from_raw(labels, mode)?)
}

#[derive(Deserialize)]
struct F1File {
    #[serde(default)]
    source: String,
    per_label: BTreeMap<String, f64>,
}

/// Reads `{"source": "..", "per_label": {"<label>": f1, ..}}`.
pub fn read_f1<R: Read>(reader: R, mode: LabelMode) -> Result<F1Table> {
    let file: F1File = serde_json::from_reader(reader)?;
    Ok(F1Table::new(file.source, file.per_label, mode)?)
}

pub fn read_report<R: Read>(reader: R) -> Result<FamiliarityReport> {
    Ok(serde_json::from_reader(reader)?)
}

pub fn write_report_json<W: Write>(writer: W, report: &FamiliarityReport, run: &RunInfo) -> Result<()> {
    write_json(writer, report, run)
}

/// Label rows followed by a final `<macro>` row. The run block goes into
/// a leading `#` comment line.
pub fn write_report_csv<W: Write>(mut writer: W, report: &FamiliarityReport, run: &RunInfo) -> Result<()> {
    writeln!(writer, "# run: {}", serde_json::to_string(run)?)?;
    writeln!(writer, "# config: {}", serde_json::to_string(&report.config)?)?;
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["label", "score", "effective_k"])?;
    for (label, score) in &report.per_label {
        let k = report.effective_k.get(label).copied().unwrap_or(0);
        csv.write_record([label.as_str(), &score.to_string(), &k.to_string()])?;
    }
    csv.write_record(["<macro>", &report.macro_score.to_string(), ""])?;
    csv.flush()?;
    Ok(())
}

pub fn read_split<R: Read>(reader: R) -> Result<SplitSpec> {
    Ok(serde_json::from_reader(reader)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use labelshift_core::{FamiliarityConfig, Weighting};

    #[test]
    fn stats_json_shape() {
        let stats = read_stats(
            r#"{"labels": {"Person": 2, "person": 1, "PLACE": 4}}"#.as_bytes(),
            LabelMode::Normalize,
        )
        .unwrap();
        assert_eq!(stats.count("person"), 3);
        let mut out = Vec::new();
        write_stats(&mut out, &stats, &RunInfo::new("stats")).unwrap();
        let value: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(value["labels"]["place"], 4);
        assert_eq!(value["total_mentions"], 7);
        assert_eq!(value["run"]["command"], "stats");
        assert_eq!(read_stats(out.as_slice(), LabelMode::Normalize).unwrap(), stats);
    }

    #[test]
    fn stats_rejects_zero_counts() {
        assert!(read_stats(r#"{"labels": {"a": 0}}"#.as_bytes(), LabelMode::Normalize).is_err());
    }

    #[test]
    fn eval_label_sources() {
        let flat = read_eval_labels(r#"{"labels": ["Person", "place"]}"#, LabelMode::Normalize).unwrap();
        assert_eq!(flat.labels(), ["person", "place"]);
        assert!(flat.per_benchmark().is_none());

        let bench = read_eval_labels(
            r#"{"benchmarks": {"mit_movie": ["Actor"], "crossner_ai": ["person", "actor"]}}"#,
            LabelMode::Normalize,
        )
        .unwrap();
        assert_eq!(bench.labels(), ["person", "actor"]);
        assert_eq!(bench.per_benchmark().unwrap().len(), 2);

        let text = read_eval_labels("person\n\n  Place \n", LabelMode::Normalize).unwrap();
        assert_eq!(text.labels(), ["person", "place"]);
    }

    #[test]
    fn f1_file() {
        let t = read_f1(
            r#"{"source": "gliner", "per_label": {"Person": 0.7}}"#.as_bytes(),
            LabelMode::Normalize,
        )
        .unwrap();
        assert_eq!(t.per_label["person"], 0.7);
        assert!(read_f1(r#"{"per_label": {"a": 1.5}}"#.as_bytes(), LabelMode::Normalize).is_err());
    }

    fn report() -> FamiliarityReport {
        FamiliarityReport {
            config: FamiliarityConfig::new(10, Weighting::Zipf),
            macro_score: 0.5,
            per_label: [("a, b".to_string(), 1.0), ("c".to_string(), 0.0)].into(),
            effective_k: [("a, b".to_string(), 3), ("c".to_string(), 3)].into(),
            per_benchmark: None,
            skipped_train_labels: Vec::new(),
            train_fingerprint: "f".into(),
        }
    }

    #[test]
    fn report_json_round_trip() {
        let mut out = Vec::new();
        write_report_json(&mut out, &report(), &RunInfo::new("familiarity")).unwrap();
        let value: serde_json::Value = serde_json::from_slice(&out).unwrap();
        for key in ["config", "macro", "per_label", "effective_k", "train_fingerprint", "run"] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(read_report(out.as_slice()).unwrap(), report());
    }

    #[test]
    fn report_csv_layout() {
        let mut out = Vec::new();
        write_report_csv(&mut out, &report(), &RunInfo::new("familiarity")).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# run: "));
        assert_eq!(lines[2], "label,score,effective_k");
        assert_eq!(lines[3], "\"a, b\",1,3");
        assert_eq!(lines[4], "c,0,3");
        assert_eq!(lines[5], "<macro>,0.5,");
    }
}
