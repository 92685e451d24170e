//! Classification and regression metrics.

use serde::Serialize;

use crate::error::{Error, Result};

pub const NUM_NLI_CLASSES: usize = 3;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Micro-averaged 3-way classification metrics. `confusion[gold][predicted]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub confusion: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryResult {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub roc_auc: f64,
    pub accuracy: f64,
    pub threshold: f64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// Metrics that hit a zero denominator and were set to 0.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub zero_division: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub mse: f64,
    pub r2: f64,
}

fn check_lengths(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    if left == 0 {
        return Err(Error::EmptyInput("metric inputs"));
    }
    Ok(())
}

pub fn eval_3way(predicted: &[usize], gold: &[usize]) -> Result<ClassificationResult> {
    check_lengths(predicted.len(), gold.len())?;
    let mut confusion = vec![vec![0u64; NUM_NLI_CLASSES]; NUM_NLI_CLASSES];
    for (&p, &g) in predicted.iter().zip(gold) {
        if p >= NUM_NLI_CLASSES || g >= NUM_NLI_CLASSES {
            return Err(Error::InvalidValue(format!(
                "class index out of range: predicted {p}, gold {g}"
            )));
        }
        confusion[g][p] += 1;
    }
    let n: u64 = predicted.len() as u64;
    // Pool per-class counts. Every error is one false positive (for the
    // predicted class) and one false negative (for the gold class).
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (c, row) in confusion.iter().enumerate() {
        let hit = row[c];
        let predicted_c: u64 = confusion.iter().map(|r| r[c]).sum();
        let gold_c: u64 = row.iter().sum();
        tp += hit;
        fp += predicted_c - hit;
        fn_ += gold_c - hit;
    }
    let correct: u64 = (0..NUM_NLI_CLASSES).map(|c| confusion[c][c]).sum();
    Ok(ClassificationResult {
        precision: tp as f64 / (tp + fp) as f64,
        recall: tp as f64 / (tp + fn_) as f64,
        f1: (2 * tp) as f64 / (2 * tp + fp + fn_) as f64,
        accuracy: correct as f64 / n as f64,
        confusion,
    })
}

fn check_binary(scores: &[f64], gold: &[u8]) -> Result<()> {
    check_lengths(scores.len(), gold.len())?;
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::InvalidValue(format!("score {s} outside [0, 1]")));
    }
    if let Some(g) = gold.iter().find(|g| **g > 1) {
        return Err(Error::InvalidValue(format!("binary gold label {g} is not 0 or 1")));
    }
    Ok(())
}

/// Area under the ROC curve from the Mann-Whitney rank sum, ties given midranks.
pub fn roc_auc(scores: &[f64], gold: &[u8]) -> Result<f64> {
    check_binary(scores, gold)?;
    let positives = gold.iter().filter(|&&g| g == 1).count();
    let negatives = gold.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClassAUC);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut positive_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1..=end share their mean
        let midrank = (start + 1 + end) as f64 / 2.0;
        let tied_positives = order[start..end].iter().filter(|&&i| gold[i] == 1).count();
        positive_rank_sum += midrank * tied_positives as f64;
        start = end;
    }
    let (p, n) = (positives as f64, negatives as f64);
    Ok((positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Thresholded precision/recall/F1 (score ≥ threshold is positive) plus ROC AUC.
pub fn eval_binary(scores: &[f64], gold: &[u8], threshold: f64) -> Result<BinaryResult> {
    let roc_auc = roc_auc(scores, gold)?;
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (&s, &g) in scores.iter().zip(gold) {
        match (s >= threshold, g == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let mut zero_division = Vec::new();
    let mut ratio = |num: u64, den: u64, name: &'static str| {
        if den == 0 {
            zero_division.push(name);
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, tp + fp, "precision");
    let recall = ratio(tp, tp + fn_, "recall");
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(BinaryResult {
        precision,
        recall,
        f1,
        roc_auc,
        accuracy: (tp + tn) as f64 / scores.len() as f64,
        threshold,
        tp,
        fp,
        tn,
        fn_,
        zero_division,
    })
}

pub fn eval_regression(predicted: &[f64], gold: &[f64]) -> Result<RegressionResult> {
    check_lengths(predicted.len(), gold.len())?;
    if predicted.len() < 2 {
        return Err(Error::EmptyInput("regression metrics need at least two examples"));
    }
    if let Some(v) = predicted.iter().chain(gold).find(|v| !v.is_finite()) {
        return Err(Error::InvalidValue(format!("non-finite regression value {v}")));
    }
    let n = gold.len() as f64;
    let mean = gold.iter().sum::<f64>() / n;
    let ss_tot: f64 = gold.iter().map(|g| (g - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let ss_res: f64 = predicted.iter().zip(gold).map(|(p, g)| (p - g).powi(2)).sum();
    Ok(RegressionResult {
        mse: ss_res / n,
        r2: 1.0 - ss_res / ss_tot,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub best_threshold: f64,
    pub best_f1: f64,
    pub curve: Vec<CurvePoint>,
}

/// Sweeps candidate thresholds drawn from the observed scores (all distinct
/// values, or `max_points` evenly spaced quantiles of them) and returns the
/// F1-maximising threshold, preferring the lowest on ties.
pub fn calibrate_threshold(scores: &[f64], gold: &[u8], max_points: usize) -> Result<Calibration> {
    check_binary(scores, gold)?;
    let positives = gold.iter().filter(|&&g| g == 1).count();
    if positives == 0 || positives == gold.len() {
        return Err(Error::SingleClassAUC);
    }
    let mut pairs: Vec<(f64, u8)> = scores.iter().copied().zip(gold.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // positives_from[i] = positives among pairs[i..]
    let mut positives_from = vec![0usize; pairs.len() + 1];
    for i in (0..pairs.len()).rev() {
        positives_from[i] = positives_from[i + 1] + pairs[i].1 as usize;
    }

    let mut distinct: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    distinct.dedup();
    let candidates: Vec<f64> = if max_points >= 2 && distinct.len() > max_points {
        let last = distinct.len() - 1;
        let mut picked: Vec<f64> = (0..max_points)
            .map(|q| distinct[(q * last + (max_points - 1) / 2) / (max_points - 1)])
            .collect();
        picked.dedup();
        picked
    } else {
        distinct
    };

    let mut curve = Vec::with_capacity(candidates.len());
    let mut best: Option<(f64, f64)> = None;
    for t in candidates {
        let first = pairs.partition_point(|p| p.0 < t);
        let predicted = pairs.len() - first;
        let tp = positives_from[first];
        let precision = if predicted == 0 {
            0.0
        } else {
            tp as f64 / predicted as f64
        };
        let recall = tp as f64 / positives as f64;
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        if best.is_none_or(|(_, f)| f1 > f) {
            best = Some((t, f1));
        }
        curve.push(CurvePoint {
            threshold: t,
            precision,
            recall,
            f1,
        });
    }
    let (best_threshold, best_f1) = best.expect("at least one candidate threshold");
    Ok(Calibration {
        best_threshold,
        best_f1,
        curve,
    })
}
