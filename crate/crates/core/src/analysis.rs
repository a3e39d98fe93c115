//! Statistics tying label counts and familiarity to externally measured
//! per-type F1 scores.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{EvalLabelSet, LabelMode, LabelStats};
use crate::metric::FamiliarityReport;

/// Evaluation labels split by whether they occur in the training set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub overlapping: Vec<String>,
    pub zero_shot: Vec<String>,
}

pub fn partition_eval_labels(eval: &EvalLabelSet, stats: &LabelStats) -> Partition {
    let (overlapping, zero_shot) = eval
        .labels()
        .iter()
        .cloned()
        .partition(|l| stats.contains(l));
    Partition {
        overlapping,
        zero_shot,
    }
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::TooFewPoints(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// OLS line `f1 = intercept + slope · log10(count)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    /// Change in F1 per tenfold increase in mentions.
    pub slope: f64,
    pub intercept: f64,
    pub n: usize,
    pub r_squared: f64,
}

impl RegressionFit {
    pub fn predict(&self, count: u64) -> f64 {
        self.intercept + self.slope * libm::log10(count as f64)
    }
}

pub fn log_linear_fit(points: &[(u64, f64)]) -> Result<RegressionFit> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    if points.iter().any(|&(c, _)| c == 0) {
        return Err(Error::InvalidConfig("mention counts must be positive"));
    }
    let xs: Vec<f64> = points.iter().map(|&(c, _)| libm::log10(c as f64)).collect();
    let n = points.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, &(_, y)) in xs.iter().zip(points) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateInput);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // A constant response is fit exactly.
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (slope * sxy / syy).clamp(0.0, 1.0)
    };
    Ok(RegressionFit {
        slope,
        intercept,
        n: points.len(),
        r_squared,
    })
}

/// Per-type F1 scores measured elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Table {
    #[serde(default)]
    pub source: String,
    pub per_label: BTreeMap<String, f64>,
}

impl F1Table {
    /// Canonicalizes labels with `mode` and checks every value is in `[0, 1]`.
    pub fn new<I, S>(source: impl Into<String>, scores: I, mode: LabelMode) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut per_label = BTreeMap::new();
        for (label, value) in scores {
            let label = mode.apply(label.as_ref())?;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::F1OutOfRange { label, value });
            }
            per_label.insert(label, value);
        }
        Ok(Self {
            source: source.into(),
            per_label,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (label, &value) in &self.per_label {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::F1OutOfRange {
                    label: label.clone(),
                    value,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    /// `(label, familiarity, f1)` in label order.
    pub paired: Vec<(String, f64, f64)>,
    pub only_in_report: Vec<String>,
    pub only_in_f1: Vec<String>,
}

/// Pearson r between per-label familiarity and F1, matched by label.
pub fn correlate_report(report: &FamiliarityReport, f1: &F1Table) -> Result<Correlation> {
    f1.validate()?;
    let mut paired = Vec::new();
    let mut only_in_report = Vec::new();
    for (label, &fam) in &report.per_label {
        match f1.per_label.get(label) {
            Some(&score) => paired.push((label.clone(), fam, score)),
            None => only_in_report.push(label.clone()),
        }
    }
    let only_in_f1 = f1
        .per_label
        .keys()
        .filter(|l| !report.per_label.contains_key(*l))
        .cloned()
        .collect();
    if paired.len() < 2 {
        return Err(Error::TooFewPoints(paired.len()));
    }
    let xs: Vec<f64> = paired.iter().map(|p| p.1).collect();
    let ys: Vec<f64> = paired.iter().map(|p| p.2).collect();
    Ok(Correlation {
        r: pearson(&xs, &ys)?,
        paired,
        only_in_report,
        only_in_f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::FamiliarityConfig;
    use alloc::string::ToString;

    #[test]
    fn partition_examples() {
        let stats = LabelStats::from_counts([("b", 1), ("c", 1)]).unwrap();
        let p = partition_eval_labels(&EvalLabelSet::new(["a", "b"]).unwrap(), &stats);
        assert_eq!(p.overlapping, ["b"]);
        assert_eq!(p.zero_shot, ["a"]);

        let p = partition_eval_labels(&EvalLabelSet::new(["c", "b"]).unwrap(), &stats);
        assert_eq!(p.overlapping, ["c", "b"]);
        assert!(p.zero_shot.is_empty());

        let p = partition_eval_labels(&EvalLabelSet::new(["x"]).unwrap(), &stats);
        assert!(p.overlapping.is_empty());
        assert_eq!(p.zero_shot, ["x"]);
    }

    #[test]
    fn pearson_examples() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]).unwrap_err(), Error::DegenerateInput);
        assert_eq!(pearson(&[1.0], &[1.0]).unwrap_err(), Error::TooFewPoints(1));
        assert_eq!(pearson(&[1.0, 2.0], &[1.0]).unwrap_err(), Error::LengthMismatch(2, 1));
    }

    #[test]
    fn regression_examples() {
        let fit = log_linear_fit(&[(10, 0.1), (1000, 0.3)]).unwrap();
        assert!((fit.slope - 0.1).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert_eq!(fit.n, 2);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.predict(100) - 0.2).abs() < 1e-12);

        let flat = log_linear_fit(&[(1, 0.4), (10, 0.4), (500, 0.4)]).unwrap();
        assert!(flat.slope.abs() < 1e-15);
        assert!((flat.intercept - 0.4).abs() < 1e-15);

        assert_eq!(log_linear_fit(&[(5, 0.1), (5, 0.9)]).unwrap_err(), Error::DegenerateInput);
        assert_eq!(log_linear_fit(&[(5, 0.1)]).unwrap_err(), Error::TooFewPoints(1));
        assert!(log_linear_fit(&[(0, 0.1), (5, 0.2)]).is_err());
    }

    fn report(scores: &[(&str, f64)]) -> FamiliarityReport {
        FamiliarityReport {
            config: FamiliarityConfig::default(),
            macro_score: 0.0,
            per_label: scores.iter().map(|(l, s)| (l.to_string(), *s)).collect(),
            effective_k: BTreeMap::new(),
            per_benchmark: None,
            skipped_train_labels: Vec::new(),
            train_fingerprint: String::new(),
        }
    }

    #[test]
    fn correlate_identical_maps() {
        let pairs = [("a", 0.2), ("b", 0.5), ("c", 0.9)];
        let f1 = F1Table::new("run", pairs, LabelMode::Normalize).unwrap();
        let c = correlate_report(&report(&pairs), &f1).unwrap();
        assert!((c.r - 1.0).abs() < 1e-12);
        assert!(c.only_in_f1.is_empty() && c.only_in_report.is_empty());
    }

    #[test]
    fn correlate_lists_unmatched() {
        let f1 = F1Table::new("run", [("a", 0.1), ("b", 0.6), ("z", 0.3)], LabelMode::Normalize)
            .unwrap();
        let c = correlate_report(&report(&[("a", 0.3), ("b", 0.4), ("y", 0.9)]), &f1).unwrap();
        assert_eq!(c.paired.len(), 2);
        assert_eq!(c.only_in_report, ["y"]);
        assert_eq!(c.only_in_f1, ["z"]);
        assert!((c.r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlate_errors() {
        let f1 = F1Table::new("run", [("a", 0.1), ("b", 0.6)], LabelMode::Normalize).unwrap();
        assert_eq!(
            correlate_report(&report(&[("a", 0.5), ("b", 0.5)]), &f1).unwrap_err(),
            Error::DegenerateInput
        );
        assert_eq!(
            correlate_report(&report(&[("a", 0.5)]), &f1).unwrap_err(),
            Error::TooFewPoints(1)
        );
        assert!(F1Table::new("x", [("a", 1.2)], LabelMode::Normalize).is_err());
    }
}
