//! Scoring classifier predictions against the test split of a manifest.
//!
//! Malware is the positive class: a true positive is a malware image
//! predicted as malware. The four derived metrics are
//!
//! ```text
//! A  = (TP + TN) / (TP + TN + FP + FN)
//! P  = TP / (TP + FP)
//! R  = TP / (TP + FN)
//! F1 = 2 P R / (P + R)
//! ```
//!
//! A ratio with a zero denominator is reported as [`Metric::Undefined`]
//! with the reason, never as a silent 0 or 1.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Label, ManifestEntry, Split};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Allowed gap, in percentage points, between a reported F1 and the F1
/// recomputed from the reported precision and recall.
pub const F1_TOLERANCE_PP: f64 = 0.05;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no prediction for test image {0}")]
    MissingPrediction(String),
    #[error("prediction for {0}, which is not a test image in the manifest")]
    UnknownImage(String),
    #[error("more than one prediction for {0}")]
    DuplicatePrediction(String),
    #[error("prediction for {path}: score {score} outside [0, 1]")]
    InvalidScore { path: String, score: f64 },
    #[error("threshold must be within [0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("confusion matrix is empty")]
    EmptyConfusion,
    #[error("predictions line {line}: {source}")]
    Syntax {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl EvalError {
    /// Violations of the manifest/prediction contract, as opposed to I/O or
    /// syntax problems.
    pub fn is_contract_violation(&self) -> bool {
        matches!(
            self,
            EvalError::MissingPrediction(_)
                | EvalError::UnknownImage(_)
                | EvalError::DuplicatePrediction(_)
                | EvalError::InvalidScore { .. }
                | EvalError::EmptyConfusion
        )
    }
}

/// One classifier output line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub image_path: String,
    pub predicted_label: Label,
    /// Malware probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl PredictionRecord {
    /// Label after applying `threshold` to the score, when there is one.
    pub fn effective_label(&self, threshold: f64) -> Label {
        match self.score {
            Some(s) if s >= threshold => Label::Malware,
            Some(_) => Label::Normal,
            None => self.predicted_label,
        }
    }
}

pub fn read_predictions_from<R: BufRead>(input: R) -> Result<Vec<PredictionRecord>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|source| EvalError::Syntax { line: i + 1, source })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>, EvalError> {
    read_predictions_from(BufReader::new(File::open(path)?))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Confusion { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// Counts with the other class taken as positive.
    pub fn swapped(&self) -> Confusion {
        Confusion {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
        }
    }

    pub fn record(&mut self, truth: Label, predicted: Label, positive: Label) {
        match (truth == positive, predicted == positive) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
        }
    }
}

impl std::ops::Add for Confusion {
    type Output = Confusion;

    fn add(self, o: Confusion) -> Confusion {
        Confusion::new(self.tp + o.tp, self.tn + o.tn, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

/// Summary of the join between manifest and predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinStats {
    pub evaluated: u64,
    /// Records whose `predicted_label` disagrees with their thresholded score.
    pub label_score_disagreements: u64,
}

/// Joins predictions with the test split and counts outcomes, `positive`
/// being the class treated as positive.
pub fn confusion(
    manifest: &[ManifestEntry],
    predictions: &[PredictionRecord],
    positive: Label,
    threshold: f64,
) -> Result<(Confusion, JoinStats), EvalError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(EvalError::InvalidThreshold(threshold));
    }
    let truth: HashMap<&str, Label> = manifest
        .iter()
        .filter(|e| e.split == Split::Test)
        .map(|e| (e.image_path.as_str(), e.label))
        .collect();
    let mut predicted: HashMap<&str, Label> = HashMap::with_capacity(predictions.len());
    let mut disagreements = 0;
    for p in predictions {
        if !truth.contains_key(p.image_path.as_str()) {
            return Err(EvalError::UnknownImage(p.image_path.clone()));
        }
        if let Some(score) = p.score {
            if !(0.0..=1.0).contains(&score) {
                return Err(EvalError::InvalidScore {
                    path: p.image_path.clone(),
                    score,
                });
            }
        }
        let label = p.effective_label(threshold);
        if label != p.predicted_label {
            disagreements += 1;
        }
        if predicted.insert(&p.image_path, label).is_some() {
            return Err(EvalError::DuplicatePrediction(p.image_path.clone()));
        }
    }
    let mut counts = Confusion::default();
    // Manifest order keeps the first reported missing image stable.
    for e in manifest.iter().filter(|e| e.split == Split::Test) {
        let guess = predicted
            .get(e.image_path.as_str())
            .ok_or_else(|| EvalError::MissingPrediction(e.image_path.clone()))?;
        counts.record(e.label, *guess, positive);
    }
    Ok((
        counts,
        JoinStats {
            evaluated: counts.total(),
            label_score_disagreements: disagreements,
        },
    ))
}

/// A ratio that may be undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Metric {
    Value(f64),
    Undefined { undefined: String },
}

impl Metric {
    fn ratio(num: u64, den: u64, reason: &str) -> Metric {
        if den == 0 {
            Metric::Undefined {
                undefined: reason.to_owned(),
            }
        } else {
            Metric::Value(num as f64 / den as f64)
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Metric::Value(v) => Some(v),
            Metric::Undefined { .. } => None,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Value(v) => write!(f, "{:.2}%", 100.0 * v),
            Metric::Undefined { undefined } => write!(f, "undefined ({undefined})"),
        }
    }
}

/// `2PR / (P + R)`.
pub fn f1_score(precision: f64, recall: f64) -> Option<f64> {
    let sum = precision + recall;
    (sum > 0.0).then(|| 2.0 * precision * recall / sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub accuracy: Metric,
    pub precision: Metric,
    pub recall: Metric,
    pub f1: Metric,
}

pub fn metrics(c: Confusion) -> Result<MetricsReport, EvalError> {
    if c.total() == 0 {
        return Err(EvalError::EmptyConfusion);
    }
    let accuracy = Metric::ratio(c.tp + c.tn, c.total(), "empty");
    let precision = Metric::ratio(c.tp, c.tp + c.fp, "no positive predictions");
    let recall = Metric::ratio(c.tp, c.tp + c.fn_, "no positive samples");
    let f1 = match (precision.value(), recall.value()) {
        (Some(p), Some(r)) => match f1_score(p, r) {
            Some(v) => Metric::Value(v),
            None => Metric::Undefined {
                undefined: "precision and recall are both zero".into(),
            },
        },
        _ => Metric::Undefined {
            undefined: "precision or recall undefined".into(),
        },
    };
    Ok(MetricsReport {
        tp: c.tp,
        tn: c.tn,
        fp: c.fp,
        fn_: c.fn_,
        accuracy,
        precision,
        recall,
        f1,
    })
}

/// Malware-positive metrics plus the normal-positive view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub evaluated: u64,
    pub label_score_disagreements: u64,
    pub malware_positive: MetricsReport,
    pub normal_positive: MetricsReport,
}

impl EvalReport {
    pub fn render(&self) -> String {
        let mut s = format!(
            "evaluated {} test images (threshold {})\n",
            self.evaluated, self.threshold
        );
        if self.label_score_disagreements > 0 {
            s.push_str(&format!(
                "note: {} prediction(s) had a predicted_label that disagrees with the thresholded score; the score was used\n",
                self.label_score_disagreements
            ));
        }
        for (title, m) in [
            ("positive class: malware", &self.malware_positive),
            ("positive class: normal", &self.normal_positive),
        ] {
            s.push_str(&format!(
                "\n{title}\n  TP {:>6}  FP {:>6}\n  FN {:>6}  TN {:>6}\n  accuracy  {}\n  precision {}\n  recall    {}\n  f1        {}\n",
                m.tp, m.fp, m.fn_, m.tn, m.accuracy, m.precision, m.recall, m.f1
            ));
        }
        s
    }
}

pub fn evaluate(
    manifest: &[ManifestEntry],
    predictions: &[PredictionRecord],
    threshold: f64,
) -> Result<EvalReport, EvalError> {
    let (counts, stats) = confusion(manifest, predictions, Label::Malware, threshold)?;
    Ok(EvalReport {
        threshold,
        evaluated: stats.evaluated,
        label_score_disagreements: stats.label_score_disagreements,
        malware_positive: metrics(counts)?,
        normal_positive: metrics(counts.swapped())?,
    })
}

/// A published row of precision, recall and F1, all in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportedRow {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ReportedRow {
    pub fn new(name: &str, precision: f64, recall: f64, f1: f64) -> Self {
        ReportedRow {
            name: name.to_owned(),
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyVerdict {
    pub name: String,
    pub reported_f1: f64,
    /// `None` when precision and recall are both zero.
    pub computed_f1: Option<f64>,
    /// Absolute gap in percentage points.
    pub gap: Option<f64>,
    pub consistent: bool,
}

/// Recomputes F1 from each row's precision and recall and flags rows whose
/// reported F1 is more than [`F1_TOLERANCE_PP`] away.
pub fn consistency_check(rows: &[ReportedRow]) -> Vec<ConsistencyVerdict> {
    rows.iter()
        .map(|row| {
            let computed = f1_score(row.precision, row.recall);
            let gap = computed.map(|c| (c - row.f1).abs());
            ConsistencyVerdict {
                name: row.name.clone(),
                reported_f1: row.f1,
                computed_f1: computed,
                gap,
                // Inputs carry two decimals; the epsilon absorbs binary rounding.
                consistent: gap.is_some_and(|g| g <= F1_TOLERANCE_PP + 1e-9),
            }
        })
        .collect()
}
