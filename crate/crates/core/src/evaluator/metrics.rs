use std::fmt;

use serde::{Deserialize, Serialize};

use crate::warning_store::Label;

/// A metric value, or the reason it is undefined for this input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Defined(f64),
    Undefined(String),
}

impl Metric {
    pub fn value(&self) -> Option<f64> {
        match self {
            Metric::Defined(v) => Some(*v),
            Metric::Undefined(_) => None,
        }
    }

    /// The value, with undefined treated as 0.
    pub fn or_zero(&self) -> f64 {
        self.value().unwrap_or(0.0)
    }

    fn ratio(num: f64, den: f64, reason: &str) -> Self {
        if den > 0.0 {
            Metric::Defined(num / den)
        } else {
            Metric::Undefined(reason.to_string())
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Defined(v) => write!(f, "{v}"),
            Metric::Undefined(reason) => write!(f, "undefined ({reason})"),
        }
    }
}

/// One warning's outcome as seen by the metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub predicted: Label,
    /// Probability-like score for the true-positive class.
    pub score: f64,
    pub fuzz_used: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn count(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let mut c = Confusion::default();
        for (predicted, actual) in pairs {
            match (predicted.is_positive(), actual.is_positive()) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn n(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: u64,
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision: Metric,
    pub recall: Metric,
    pub f1: Metric,
    pub mcc: f64,
    pub auc_roc: Metric,
    pub auc_pr: Metric,
    pub fuzz_invocation_rate: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("no predictions to evaluate")]
    EmptyInput,
    #[error("{predictions} predictions but {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("score {score} of prediction {index} is outside [0, 1]")]
    InvalidScore { index: usize, score: f64 },
}

/// Matthews correlation; 0 when any marginal is empty.
pub fn mcc(c: &Confusion) -> f64 {
    let [tp, fp, fne, tn] = [c.tp, c.fp, c.fn_, c.tn].map(|v| v as f64);
    let den = (tp + fp) * (tp + fne) * (tn + fp) * (tn + fne);
    if den == 0.0 {
        0.0
    } else {
        ((tp * tn - fp * fne) / den.sqrt()).clamp(-1.0, 1.0)
    }
}

/// Area under the ROC curve as the Mann-Whitney statistic with midranks,
/// so tied positive/negative pairs count one half.
pub fn auc_roc(scores: &[f64], labels: &[Label]) -> Metric {
    let n_pos = labels.iter().filter(|l| l.is_positive()).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Metric::Undefined("needs both classes".into());
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks are 1-based; the tie group i..=j shares their mean.
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_pos += mid * order[i..=j].iter().filter(|&&k| labels[k].is_positive()).count() as f64;
        i = j + 1;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Metric::Defined((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q))
}

/// Average precision: Σ (R_k − R_{k−1}) · P_k over distinct score thresholds,
/// highest first, without interpolation.
pub fn average_precision(scores: &[f64], labels: &[Label]) -> Metric {
    let n_pos = labels.iter().filter(|l| l.is_positive()).count();
    if n_pos == 0 {
        return Metric::Undefined("no positive labels".into());
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut seen, mut prev_recall, mut ap) = (0usize, 0usize, 0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        tp += order[i..=j].iter().filter(|&&k| labels[k].is_positive()).count();
        seen += j - i + 1;
        let recall = tp as f64 / n_pos as f64;
        ap += (recall - prev_recall) * (tp as f64 / seen as f64);
        prev_recall = recall;
        i = j + 1;
    }
    Metric::Defined(ap)
}

pub fn compute_metrics(predictions: &[Prediction], labels: &[Label]) -> Result<EvalReport, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if predictions.len() != labels.len() {
        return Err(EvalError::LengthMismatch { predictions: predictions.len(), labels: labels.len() });
    }
    if let Some((index, p)) = predictions.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(&p.score)) {
        return Err(EvalError::InvalidScore { index, score: p.score });
    }
    let c = Confusion::count(predictions.iter().map(|p| p.predicted).zip(labels.iter().copied()));
    let n = c.n() as f64;
    let [tp, fp, fne, tn] = [c.tp, c.fp, c.fn_, c.tn].map(|v| v as f64);
    let scores: Vec<f64> = predictions.iter().map(|p| p.score).collect();
    Ok(EvalReport {
        n: c.n(),
        confusion: c,
        accuracy: (tp + tn) / n,
        precision: Metric::ratio(tp, tp + fp, "no predicted positives"),
        recall: Metric::ratio(tp, tp + fne, "no actual positives"),
        f1: Metric::ratio(2.0 * tp, 2.0 * tp + fp + fne, "no predicted or actual positives"),
        mcc: mcc(&c),
        auc_roc: auc_roc(&scores, labels),
        auc_pr: average_precision(&scores, labels),
        fuzz_invocation_rate: predictions.iter().filter(|p| p.fuzz_used).count() as f64 / n,
    })
}

impl EvalReport {
    /// Flat `key=value` document with a fixed key order.
    pub fn to_kv(&self) -> String {
        let c = &self.confusion;
        let rows: [(&str, String); 13] = [
            ("n", self.n.to_string()),
            ("tp", c.tp.to_string()),
            ("fp", c.fp.to_string()),
            ("fn", c.fn_.to_string()),
            ("tn", c.tn.to_string()),
            ("accuracy", self.accuracy.to_string()),
            ("precision", self.precision.to_string()),
            ("recall", self.recall.to_string()),
            ("f1", self.f1.to_string()),
            ("mcc", self.mcc.to_string()),
            ("auc_roc", self.auc_roc.to_string()),
            ("auc_pr", self.auc_pr.to_string()),
            ("fuzz_invocation_rate", self.fuzz_invocation_rate.to_string()),
        ];
        rows.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
