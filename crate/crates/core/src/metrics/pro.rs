//! Area under the per-region-overlap curve.

use super::regions::connected_components;
use crate::error::{Error, Result};
use crate::tensor::{BinaryMask, Tensor};

pub const DEFAULT_FPR_LIMIT: f64 = 0.3;

/// One point of the PRO curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProPoint {
    pub fpr: f64,
    pub pro: f64,
}

struct Pixel {
    score: f32,
    /// Global region id, or `None` for a negative.
    region: Option<usize>,
}

fn pool(maps: &[Tensor], masks: &[BinaryMask]) -> Result<(Vec<Pixel>, Vec<usize>)> {
    if maps.len() != masks.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} score maps for {} masks",
            maps.len(),
            masks.len()
        )));
    }
    let mut pixels = Vec::new();
    let mut sizes = Vec::new();
    for (i, (map, mask)) in maps.iter().zip(masks).enumerate() {
        let (h, w) = map.dims2()?;
        if (h, w) != (mask.height(), mask.width()) {
            return Err(Error::ShapeMismatch(format!(
                "sample {i}: score map {h}x{w}, mask {}x{}",
                mask.height(),
                mask.width()
            )));
        }
        let set = connected_components(mask);
        let offset = sizes.len();
        sizes.extend(set.regions().iter().map(Vec::len));
        let labels = set.labels(h * w);
        pixels.extend(map.data().iter().zip(labels).map(|(&score, r)| Pixel {
            score,
            region: r.map(|id| id + offset),
        }));
    }
    if let Some(p) = pixels.iter().find(|p| !p.score.is_finite()) {
        return Err(Error::MetricPrecondition(format!("non-finite score {}", p.score)));
    }
    Ok((pixels, sizes))
}

/// PRO curve over descending thresholds, starting at (0, 0).
pub fn pro_curve(maps: &[Tensor], masks: &[BinaryMask]) -> Result<Vec<ProPoint>> {
    let (mut pixels, sizes) = pool(maps, masks)?;
    if sizes.is_empty() {
        return Err(Error::MetricPrecondition("no anomalous pixels in any mask".into()));
    }
    let negatives = pixels.iter().filter(|p| p.region.is_none()).count();
    if negatives == 0 {
        return Err(Error::MetricPrecondition("no normal pixels in any mask".into()));
    }
    pixels.sort_by(|a, b| b.score.total_cmp(&a.score));

    // Fully covered regions are counted exactly; only partially covered ones
    // contribute a running fractional sum, reset once none remain.
    let mut hits = vec![0usize; sizes.len()];
    let (mut full, mut partial, mut partial_sum) = (0usize, 0usize, 0.0f64);
    let mut points = vec![ProPoint { fpr: 0.0, pro: 0.0 }];
    let mut fp = 0usize;
    for (k, px) in pixels.iter().enumerate() {
        match px.region {
            Some(r) => {
                hits[r] += 1;
                let size = sizes[r];
                if hits[r] == size {
                    full += 1;
                    if size > 1 {
                        partial -= 1;
                        partial_sum -= (size - 1) as f64 / size as f64;
                    }
                } else {
                    if hits[r] == 1 {
                        partial += 1;
                    }
                    partial_sum += 1.0 / size as f64;
                }
                if partial == 0 {
                    partial_sum = 0.0;
                }
            }
            None => fp += 1,
        }
        if k + 1 == pixels.len() || pixels[k + 1].score != px.score {
            points.push(ProPoint {
                fpr: fp as f64 / negatives as f64,
                pro: (full as f64 + partial_sum) / sizes.len() as f64,
            });
        }
    }
    Ok(points)
}

/// Trapezoid area under `points` on [0, limit], interpolating at the limit,
/// divided by the limit. Points must be ordered by non-decreasing FPR.
pub fn normalized_area(points: &[ProPoint], limit: f64) -> f64 {
    let mut area = 0.0;
    for pair in points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.fpr >= limit {
            break;
        }
        if b.fpr <= limit {
            area += (b.fpr - a.fpr) * (a.pro + b.pro) / 2.0;
        } else {
            let t = (limit - a.fpr) / (b.fpr - a.fpr);
            let pro = a.pro + t * (b.pro - a.pro);
            area += (limit - a.fpr) * (a.pro + pro) / 2.0;
        }
    }
    area / limit
}

pub fn aupro(maps: &[Tensor], masks: &[BinaryMask], fpr_limit: f64) -> Result<f64> {
    if !(fpr_limit > 0.0 && fpr_limit <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "FPR limit {fpr_limit} outside (0, 1]"
        )));
    }
    Ok(normalized_area(&pro_curve(maps, masks)?, fpr_limit))
}
