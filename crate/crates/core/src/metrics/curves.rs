//! Threshold metrics over labeled scores. A sample is predicted positive when
//! its score is >= the threshold; samples sharing a score enter together.

use super::LabeledScores;
use crate::error::{Error, Result};

/// Cumulative (tp, fp) after each group of tied scores, descending.
pub(crate) fn tie_groups(d: &LabeledScores) -> Vec<(u64, u64)> {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    let s = d.scores();
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    for (k, &i) in idx.iter().enumerate() {
        if d.labels()[i] {
            tp += 1;
        } else {
            fp += 1;
        }
        if k + 1 == idx.len() || s[idx[k + 1]] != s[i] {
            out.push((tp, fp));
        }
    }
    out
}

fn require_positives(d: &LabeledScores) -> Result<u64> {
    match d.positives() {
        0 => Err(Error::MetricPrecondition("no positive samples".into())),
        p => Ok(p as u64),
    }
}

/// Area under the ROC curve; equals P(s+ > s-) + P(s+ = s-) / 2.
pub fn auroc(d: &LabeledScores) -> Result<f64> {
    let p = require_positives(d)?;
    let n = d.negatives() as u64;
    if n == 0 {
        return Err(Error::MetricPrecondition("no negative samples".into()));
    }
    // Twice the trapezoid area in units of one (tp, fp) cell, kept integral.
    let (mut area2, mut prev) = (0u128, (0u64, 0u64));
    for (tp, fp) in tie_groups(d) {
        area2 += (fp - prev.1) as u128 * (tp + prev.0) as u128;
        prev = (tp, fp);
    }
    Ok(area2 as f64 / (2.0 * p as f64 * n as f64))
}

/// Step-interpolated average precision.
pub fn average_precision(d: &LabeledScores) -> Result<f64> {
    let p = require_positives(d)?;
    let mut ap = 0.0;
    let mut prev_tp = 0u64;
    for (tp, fp) in tie_groups(d) {
        if tp > prev_tp {
            ap += (tp - prev_tp) as f64 / p as f64 * (tp as f64 / (tp + fp) as f64);
            prev_tp = tp;
        }
    }
    Ok(ap)
}

pub fn f1_max(d: &LabeledScores) -> Result<f64> {
    let p = require_positives(d)?;
    Ok(tie_groups(d)
        .into_iter()
        .map(|(tp, fp)| 2.0 * tp as f64 / (tp + fp + p) as f64)
        .fold(0.0, f64::max))
}
