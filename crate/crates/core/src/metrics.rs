//! Precision/recall curves, average precision, the imbalance-sensitivity AUC
//! and the median/sigma aggregates used in the summary tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TscvError};
use crate::types::ScoredFold;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Precision/recall pairs, one per distinct score, in descending threshold order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

/// Builds the PR curve by sweeping thresholds from the highest score down.
/// Samples sharing a score enter the confusion counts together.
pub fn pr_curve(scores: &[f64], labels: &[u8]) -> Result<PrCurve> {
    if scores.len() != labels.len() {
        return Err(TscvError::Shape(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(TscvError::Input(format!("score at position {} is NaN", i + 1)));
    }
    let total_pos = labels.iter().filter(|&&y| y == 1).count();
    if total_pos == 0 || total_pos == labels.len() {
        return Err(TscvError::UndefinedMetric(
            "precision/recall needs both positive and negative labels".into(),
        ));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(PrPoint {
            threshold,
            precision: tp as f64 / (tp + fp) as f64,
            recall: tp as f64 / total_pos as f64,
        });
    }
    Ok(PrCurve { points })
}

/// Recall-weighted mean of precisions: `sum_i (R_i - R_{i-1}) * P_i`, `R_0 = 0`.
pub fn average_precision(curve: &PrCurve) -> f64 {
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for p in &curve.points {
        ap += (p.recall - prev_recall) * p.precision;
        prev_recall = p.recall;
    }
    ap
}

/// Convenience wrapper: AP straight from scores and labels.
pub fn average_precision_score(scores: &[f64], labels: &[u8]) -> Result<f64> {
    pr_curve(scores, labels).map(|c| average_precision(&c))
}

/// Trapezoidal area of AUC-PR (`s`) over positive ratio (`r`) across the
/// valid folds. Points are stably sorted by `r`; equal `r` values give
/// zero-width trapezoids.
pub fn sensitivity_auc(folds: &[ScoredFold]) -> Result<f64> {
    let points: Vec<(f64, f64)> = folds
        .iter()
        .filter(|f| f.valid)
        .filter_map(|f| f.auc_pr.map(|s| (f.positive_ratio, s)))
        .collect();
    trapezoid_auc(&points)
}

/// Trapezoidal integral over `(r, s)` points after sorting by `r`.
pub fn trapezoid_auc(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(TscvError::InsufficientData(format!(
            "sensitivity AUC needs at least 2 valid folds, got {}",
            points.len()
        )));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(sorted
        .windows(2)
        .map(|w| (w[0].1 + w[1].1) / 2.0 * (w[1].0 - w[0].0))
        .sum())
}

/// Median with the midpoint convention for even counts. `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 0 { (v[mid - 1] + v[mid]) / 2.0 } else { v[mid] })
}

/// Population (divide-by-n) standard deviation.
pub fn population_std(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub sigma: f64,
    pub n: usize,
}

pub fn aggregate(values: &[f64]) -> Option<Summary> {
    Some(Summary { median: median(values)?, sigma: population_std(values)?, n: values.len() })
}

/// Groups `(key, value)` pairs and summarizes each group. Keys come back sorted.
pub fn aggregate_groups<K: Ord>(items: impl IntoIterator<Item = (K, f64)>) -> BTreeMap<K, Summary> {
    let mut groups: BTreeMap<K, Vec<f64>> = BTreeMap::new();
    for (k, v) in items {
        groups.entry(k).or_default().push(v);
    }
    groups
        .into_iter()
        .filter_map(|(k, vs)| aggregate(&vs).map(|s| (k, s)))
        .collect()
}
