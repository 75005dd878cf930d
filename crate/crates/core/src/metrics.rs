//! Ranking metrics: ROC AUC (Mann-Whitney form) and the two-sample
//! Kolmogorov-Smirnov statistic between class-conditional score
//! distributions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// AUC and KS for one split of one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub split: String,
    pub auc: f64,
    pub ks: f64,
    pub positives: usize,
    pub negatives: usize,
}

impl EvalReport {
    pub fn compute(split: &str, scores: &[f64], labels: &[bool]) -> Result<Self> {
        let (positives, negatives) = class_counts(scores, labels)?;
        Ok(EvalReport {
            split: split.to_string(),
            auc: auc(scores, labels)?,
            ks: ks(scores, labels)?,
            positives,
            negatives,
        })
    }
}

fn class_counts(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&y| y).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(format!("need both classes, got {pos} positive and {neg} negative")));
    }
    Ok((pos, neg))
}

/// Indices sorted by ascending score.
fn order(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    idx
}

/// Probability that a random positive outscores a random negative, ties
/// counted as one half. Computed from the rank sum of the positives with
/// average ranks over tied groups.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    let idx = order(scores);
    // Twice the positive rank sum; average ranks of tie groups are
    // half-integers, so this stays integral.
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            j += 1;
        }
        // ranks i+1..=j, average (i+1+j)/2
        let twice_avg = (i + 1 + j) as u128;
        let group_pos = idx[i..j].iter().filter(|&&k| labels[k]).count() as u128;
        twice_rank_sum += twice_avg * group_pos;
        i = j;
    }
    let p = pos as u128;
    let twice_u = twice_rank_sum - p * (p + 1);
    Ok(twice_u as f64 / (2 * p * neg as u128) as f64)
}

/// Maximum gap between the empirical CDFs of positive and negative scores,
/// evaluated at every distinct score.
pub fn ks(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    let idx = order(scores);
    let (mut cp, mut cn) = (0usize, 0usize);
    let mut best = 0.0f64;
    let mut i = 0;
    while i < idx.len() {
        let s = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == s {
            if labels[idx[i]] {
                cp += 1;
            } else {
                cn += 1;
            }
            i += 1;
        }
        let gap = (cp as f64 / pos as f64 - cn as f64 / neg as f64).abs();
        best = best.max(gap);
    }
    Ok(best)
}

/// ROC curve vertices `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, one vertex per
/// distinct score threshold (descending).
pub fn roc_points(scores: &[f64], labels: &[bool]) -> Result<Vec<(f64, f64)>> {
    let (pos, neg) = class_counts(scores, labels)?;
    let mut idx = order(scores);
    idx.reverse();
    let mut pts = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < idx.len() {
        let s = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == s {
            if labels[idx[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        pts.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(pts)
}

/// `roc_points.tsv` body: header `fpr<TAB>tpr` then one vertex per line.
pub fn roc_points_tsv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("fpr\ttpr\n");
    for (f, t) in points {
        let _ = writeln!(s, "{f}\t{t}");
    }
    s
}
