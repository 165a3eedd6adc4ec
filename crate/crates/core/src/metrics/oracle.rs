//! Brute-force reference implementations used to validate the metrics.
//! Quadratic or worse; meant for small instances only.

use crate::error::{Error, Result};
use crate::tensor::{BinaryMask, Tensor};

fn unique_desc(scores: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut t: Vec<f64> = scores.collect();
    t.sort_by(|a, b| b.total_cmp(a));
    t.dedup();
    t
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counted half.
pub fn auroc_pairs(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0u64, 0u64);
    for (&si, _) in scores.iter().zip(labels).filter(|(_, &l)| l) {
        for (&sj, _) in scores.iter().zip(labels).filter(|(_, &l)| !l) {
            pairs += 2;
            if si > sj {
                wins += 2;
            } else if si == sj {
                wins += 1;
            }
        }
    }
    wins as f64 / pairs as f64
}

/// (tp, fp) when predicting `score >= t`.
fn confusion(scores: &[f64], labels: &[bool], t: f64) -> (usize, usize) {
    scores.iter().zip(labels).fold((0, 0), |(tp, fp), (&s, &l)| match (s >= t, l) {
        (true, true) => (tp + 1, fp),
        (true, false) => (tp, fp + 1),
        _ => (tp, fp),
    })
}

pub fn average_precision_thresholds(scores: &[f64], labels: &[bool]) -> f64 {
    let p = labels.iter().filter(|&&l| l).count() as f64;
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for t in unique_desc(scores.iter().copied()) {
        let (tp, fp) = confusion(scores, labels, t);
        let recall = tp as f64 / p;
        ap += (recall - prev_recall) * tp as f64 / (tp + fp) as f64;
        prev_recall = recall;
    }
    ap
}

pub fn f1_max_thresholds(scores: &[f64], labels: &[bool]) -> f64 {
    let p = labels.iter().filter(|&&l| l).count() as f64;
    unique_desc(scores.iter().copied())
        .into_iter()
        .map(|t| {
            let (tp, fp) = confusion(scores, labels, t);
            let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
            let recall = tp as f64 / p;
            if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            }
        })
        .fold(0.0, f64::max)
}

/// Region labels by repeated neighbor relaxation until nothing changes.
fn relax_labels(m: &BinaryMask) -> Vec<Option<usize>> {
    let (h, w) = (m.height(), m.width());
    let mut label: Vec<Option<usize>> = (0..h * w).map(|i| (m.bits()[i] != 0).then_some(i)).collect();
    loop {
        let mut changed = false;
        for r in 0..h {
            for c in 0..w {
                let Some(mut best) = label[r * w + c] else { continue };
                for rr in r.saturating_sub(1)..=(r + 1).min(h - 1) {
                    for cc in c.saturating_sub(1)..=(c + 1).min(w - 1) {
                        if let Some(l) = label[rr * w + cc] {
                            best = best.min(l);
                        }
                    }
                }
                if Some(best) != label[r * w + c] {
                    label[r * w + c] = Some(best);
                    changed = true;
                }
            }
        }
        if !changed {
            return label;
        }
    }
}

/// Number of 8-connected regions, by label relaxation.
pub fn count_regions(m: &BinaryMask) -> usize {
    let mut ids: Vec<usize> = relax_labels(m).into_iter().flatten().collect();
    ids.sort_unstable();
    ids.dedup();
    ids.len()
}

/// AU-PRO evaluated threshold by threshold from scratch.
pub fn aupro_exhaustive(maps: &[Tensor], masks: &[BinaryMask], limit: f64) -> Result<f64> {
    struct Region {
        image: usize,
        pixels: Vec<usize>,
    }
    let mut regions: Vec<Region> = Vec::new();
    let mut negatives = 0usize;
    for (i, m) in masks.iter().enumerate() {
        let labels = relax_labels(m);
        let mut ids: Vec<usize> = labels.iter().flatten().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        for id in ids {
            let pixels = (0..labels.len()).filter(|&p| labels[p] == Some(id)).collect();
            regions.push(Region { image: i, pixels });
        }
        negatives += labels.iter().filter(|l| l.is_none()).count();
    }
    if regions.is_empty() || negatives == 0 {
        return Err(Error::MetricPrecondition("need both classes".into()));
    }
    let thresholds = unique_desc(maps.iter().flat_map(|m| m.data().iter().map(|&v| v as f64)));
    let mut curve = vec![(0.0, 0.0)];
    for t in thresholds {
        let fp: usize = maps
            .iter()
            .zip(masks)
            .map(|(map, m)| {
                map.data()
                    .iter()
                    .zip(m.bits())
                    .filter(|&(&s, &b)| b == 0 && s as f64 >= t)
                    .count()
            })
            .sum();
        let pro = regions
            .iter()
            .map(|r| {
                let hit = r.pixels.iter().filter(|&&p| maps[r.image].data()[p] as f64 >= t).count();
                hit as f64 / r.pixels.len() as f64
            })
            .sum::<f64>()
            / regions.len() as f64;
        curve.push((fp as f64 / negatives as f64, pro));
    }
    let mut area = 0.0;
    for pair in curve.windows(2) {
        let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
        let hi = x1.min(limit);
        if hi <= x0 {
            continue;
        }
        let y_hi = y0 + (y1 - y0) * (hi - x0) / (x1 - x0);
        area += (hi - x0) * (y0 + y_hi) / 2.0;
    }
    Ok(area / limit)
}
