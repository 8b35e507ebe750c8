//! Confusion counts, accuracy/precision/recall/F1 and 1-D Gaussian smoothing.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One-vs-rest counts for every class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionStats {
    pub tp: Vec<u64>,
    pub tn: Vec<u64>,
    pub fp: Vec<u64>,
    pub fn_: Vec<u64>,
    pub n_samples: u64,
    /// Number of predictions equal to the true label.
    pub correct: u64,
}

impl ConfusionStats {
    pub fn n_classes(&self) -> usize {
        self.tp.len()
    }

    /// Counts for a single class from its four entries (used for checking the
    /// formulas directly). `correct` is taken as `tp + tn`, the binary view.
    pub fn binary(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        let n = tp + tn + fp + fn_;
        ConfusionStats {
            tp: vec![tn, tp],
            tn: vec![tp, tn],
            fp: vec![fn_, fp],
            fn_: vec![fp, fn_],
            n_samples: n,
            correct: tp + tn,
        }
    }
}

/// Per-class one-vs-rest counts over `n_classes` classes.
pub fn confusion(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<ConfusionStats> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            y_true: y_true.len(),
            y_pred: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyLabels);
    }
    let mut tp = vec![0u64; n_classes];
    let mut fp = vec![0u64; n_classes];
    let mut fn_ = vec![0u64; n_classes];
    let mut correct = 0;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        for label in [t, p] {
            if label >= n_classes {
                return Err(Error::UnknownLabel { label, n_classes });
            }
        }
        if t == p {
            tp[t] += 1;
            correct += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let n = y_true.len() as u64;
    let tn = (0..n_classes).map(|c| n - tp[c] - fp[c] - fn_[c]).collect();
    Ok(ConfusionStats {
        tp,
        tn,
        fp,
        fn_,
        n_samples: n,
        correct,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Precision/recall/F1 of one designated positive class.
    BinaryPositive(usize),
    /// Unweighted mean of the per-class values.
    Macro,
}

impl Averaging {
    pub fn describe(&self, class_names: &[String]) -> String {
        match self {
            Averaging::BinaryPositive(c) => format!(
                "binary_positive_class:{}",
                class_names.get(*c).map_or("?", String::as_str)
            ),
            Averaging::Macro => "macro".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub averaging: Averaging,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_of(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Precision, recall and F1 of class `c`; each is 0 when its denominator is 0.
pub fn class_scores(cs: &ConfusionStats, c: usize) -> (f64, f64, f64) {
    let p = ratio(cs.tp[c], cs.tp[c] + cs.fp[c]);
    let r = ratio(cs.tp[c], cs.tp[c] + cs.fn_[c]);
    (p, r, f1_of(p, r))
}

pub fn compute_metrics(cs: &ConfusionStats, averaging: Averaging) -> MetricsReport {
    let accuracy = ratio(cs.correct, cs.n_samples);
    let (precision, recall, f1) = match averaging {
        Averaging::BinaryPositive(c) => class_scores(cs, c),
        Averaging::Macro => {
            let k = cs.n_classes().max(1) as f64;
            let (p, r, f) = (0..cs.n_classes())
                .map(|c| class_scores(cs, c))
                .fold((0.0, 0.0, 0.0), |acc, s| (acc.0 + s.0, acc.1 + s.1, acc.2 + s.2));
            (p / k, r / k, f / k)
        }
    };
    MetricsReport {
        accuracy,
        precision,
        recall,
        f1,
        averaging,
    }
}

/// Convenience: confusion + metrics in one call.
pub fn evaluate(y_true: &[usize], y_pred: &[usize], n_classes: usize, averaging: Averaging) -> Result<MetricsReport> {
    Ok(compute_metrics(&confusion(y_true, y_pred, n_classes)?, averaging))
}

/// Kernel half-width: `floor(4σ + 0.5)` samples.
pub fn kernel_radius(sigma: f64) -> usize {
    (4.0 * sigma + 0.5).floor() as usize
}

/// Gaussian convolution truncated at 4σ.
///
/// Near the ends the kernel is cut at the series boundary and the remaining
/// weights are renormalised to sum to one (no reflection or padding).
pub fn gaussian_smooth(series: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidSigma(sigma));
    }
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let radius = kernel_radius(sigma);
    let kernel: Vec<f64> = (0..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let n = series.len();
    let out = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius).min(n - 1);
            let (mut acc, mut norm) = (0.0, 0.0);
            for (j, &x) in series.iter().enumerate().take(hi + 1).skip(lo) {
                let w = kernel[i.abs_diff(j)];
                acc += w * x;
                norm += w;
            }
            acc / norm
        })
        .collect();
    Ok(out)
}
