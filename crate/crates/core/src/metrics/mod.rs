//! Image- and pixel-level anomaly detection metrics and their mean (mAD).

pub mod curves;
pub mod oracle;
pub mod pro;
pub mod regions;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{BinaryMask, Tensor};

pub use curves::{auroc, average_precision, f1_max};
pub use pro::{aupro, pro_curve, ProPoint, DEFAULT_FPR_LIMIT};
pub use regions::{connected_components, RegionSet};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScores {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl LabeledScores {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} scores for {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if scores.is_empty() {
            return Err(Error::MetricPrecondition("no samples".into()));
        }
        if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::MetricPrecondition(format!("non-finite score {s}")));
        }
        Ok(Self { scores, labels })
    }

    /// Every pixel of every map, labeled by its mask.
    pub fn from_maps(maps: &[Tensor], masks: &[BinaryMask]) -> Result<Self> {
        if maps.len() != masks.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} score maps for {} masks",
                maps.len(),
                masks.len()
            )));
        }
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        for (i, (map, mask)) in maps.iter().zip(masks).enumerate() {
            let (h, w) = map.dims2()?;
            if (h, w) != (mask.height(), mask.width()) {
                return Err(Error::ShapeMismatch(format!(
                    "sample {i}: score map {h}x{w}, mask {}x{}",
                    mask.height(),
                    mask.width()
                )));
            }
            scores.extend(map.data().iter().map(|&v| v as f64));
            labels.extend(mask.bits().iter().map(|&b| b != 0));
        }
        Self::new(scores, labels)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub auroc: f64,
    pub ap: f64,
    pub f1max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelMetrics {
    pub auroc: f64,
    pub ap: f64,
    pub f1max: f64,
    pub aupro: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub image: ImageMetrics,
    pub pixel: PixelMetrics,
    pub mad: f64,
}

/// Mean of the seven metrics.
pub fn mad(image: [f64; 3], pixel: [f64; 4]) -> Result<f64> {
    let all = image.iter().chain(&pixel);
    if let Some(v) = all.clone().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::MetricPrecondition(format!("metric value {v} outside [0, 1]")));
    }
    Ok(all.sum::<f64>() / 7.0)
}

fn percent(v: f64) -> String {
    format!("{:.1}", v * 100.0)
}

impl MetricsReport {
    pub fn new(image: ImageMetrics, pixel: PixelMetrics) -> Result<Self> {
        let mad = mad(
            [image.auroc, image.ap, image.f1max],
            [pixel.auroc, pixel.ap, pixel.f1max, pixel.aupro],
        )?;
        Ok(Self { image, pixel, mad })
    }

    pub fn values(&self) -> [f64; 7] {
        let (i, p) = (self.image, self.pixel);
        [i.auroc, i.ap, i.f1max, p.auroc, p.ap, p.f1max, p.aupro]
    }

    /// Every field rounded to `digits` decimals.
    pub fn rounded(&self, digits: i32) -> Self {
        let s = 10f64.powi(digits);
        let r = |v: f64| (v * s).round() / s;
        Self {
            image: ImageMetrics {
                auroc: r(self.image.auroc),
                ap: r(self.image.ap),
                f1max: r(self.image.f1max),
            },
            pixel: PixelMetrics {
                auroc: r(self.pixel.auroc),
                ap: r(self.pixel.ap),
                f1max: r(self.pixel.f1max),
                aupro: r(self.pixel.aupro),
            },
            mad: r(self.mad),
        }
    }

    /// Field-wise mean; `mad` is recomputed from the averaged metrics.
    pub fn mean(reports: &[MetricsReport]) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::MetricPrecondition("no reports to average".into()));
        }
        let n = reports.len() as f64;
        let avg = |f: fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        Self::new(
            ImageMetrics {
                auroc: avg(|r| r.image.auroc),
                ap: avg(|r| r.image.ap),
                f1max: avg(|r| r.image.f1max),
            },
            PixelMetrics {
                auroc: avg(|r| r.pixel.auroc),
                ap: avg(|r| r.pixel.ap),
                f1max: avg(|r| r.pixel.f1max),
                aupro: avg(|r| r.pixel.aupro),
            },
        )
    }

    pub const CSV_HEADER: &'static str = "image AU-ROC/AP/F1_max,pixel AU-ROC/AP/F1_max/AU-PRO,mAD";

    /// Percentages with one decimal, e.g. `98.6/99.6/97.8,97.7/56.3/59.2/93.1,86.0`.
    pub fn csv_row(&self) -> String {
        let (i, p) = (self.image, self.pixel);
        format!(
            "{}/{}/{},{}/{}/{}/{},{}",
            percent(i.auroc),
            percent(i.ap),
            percent(i.f1max),
            percent(p.auroc),
            percent(p.ap),
            percent(p.f1max),
            percent(p.aupro),
            percent(self.mad)
        )
    }
}

/// Image metrics from `image_scores`; pixel metrics from all pixels of all
/// maps pooled together.
pub fn evaluate(
    image_scores: &LabeledScores,
    maps: &[Tensor],
    masks: &[BinaryMask],
    fpr_limit: f64,
) -> Result<MetricsReport> {
    if image_scores.len() != maps.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} image scores for {} score maps",
            image_scores.len(),
            maps.len()
        )));
    }
    let image = ImageMetrics {
        auroc: auroc(image_scores)?,
        ap: average_precision(image_scores)?,
        f1max: f1_max(image_scores)?,
    };
    let pixels = LabeledScores::from_maps(maps, masks)?;
    let pixel = PixelMetrics {
        auroc: auroc(&pixels)?,
        ap: average_precision(&pixels)?,
        f1max: f1_max(&pixels)?,
        aupro: aupro(maps, masks, fpr_limit)?,
    };
    MetricsReport::new(image, pixel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mad_examples() {
        assert_eq!(mad([1.0; 3], [1.0; 4]).unwrap(), 1.0);
        assert_eq!(mad([0.5; 3], [0.5; 4]).unwrap(), 0.5);
        let v = mad([0.986, 0.996, 0.978], [0.977, 0.563, 0.592, 0.931]).unwrap();
        assert!((v - 0.8604285714285714).abs() < 1e-12);
        assert_eq!(percent(v), "86.0");
        assert!(mad([1.1, 1.0, 1.0], [1.0; 4]).is_err());
    }

    fn fixture(perfect: bool) -> (LabeledScores, Vec<Tensor>, Vec<BinaryMask>) {
        let mut masks = Vec::new();
        let mut maps = Vec::new();
        for i in 0..3 {
            let mut m = BinaryMask::zeros(4, 4).unwrap();
            if i > 0 {
                m.set(i, i, true);
                m.set(i, i - 1, true);
            }
            let map = if perfect {
                m.to_tensor()
            } else {
                Tensor::from_fn(&[4, 4], |p| ((p * 7 + i * 3) % 11) as f32 / 10.0).unwrap()
            };
            masks.push(m);
            maps.push(map);
        }
        let image = if perfect { vec![0.1, 0.9, 0.8] } else { vec![0.5, 0.2, 0.7] };
        (
            LabeledScores::new(image, vec![false, true, true]).unwrap(),
            maps,
            masks,
        )
    }

    #[test]
    fn perfect_predictions() {
        let (img, maps, masks) = fixture(true);
        let r = evaluate(&img, &maps, &masks, 0.3).unwrap();
        assert_eq!(r.values(), [1.0; 7]);
        assert_eq!(r.mad, 1.0);
        assert_eq!(r.csv_row(), "100.0/100.0/100.0,100.0/100.0/100.0/100.0,100.0");
    }

    #[test]
    fn evaluate_composes_standalone_metrics() {
        let (img, maps, masks) = fixture(false);
        let r = evaluate(&img, &maps, &masks, 0.3).unwrap();
        let pooled = LabeledScores::from_maps(&maps, &masks).unwrap();
        assert_eq!(r.image.auroc, auroc(&img).unwrap());
        assert_eq!(r.image.f1max, f1_max(&img).unwrap());
        assert_eq!(r.pixel.ap, average_precision(&pooled).unwrap());
        assert_eq!(r.pixel.aupro, aupro(&maps, &masks, 0.3).unwrap());
        assert!(r.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn report_json_round_trip_at_six_decimals() {
        let (img, maps, masks) = fixture(false);
        let r = evaluate(&img, &maps, &masks, 0.3).unwrap().rounded(6);
        let json = serde_json::to_string(&r).unwrap();
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn single_class_images_rejected() {
        let (_, maps, masks) = fixture(false);
        let img = LabeledScores::new(vec![0.1, 0.2, 0.3], vec![false; 3]).unwrap();
        assert!(matches!(
            evaluate(&img, &maps, &masks, 0.3),
            Err(Error::MetricPrecondition(_))
        ));
    }

    #[test]
    fn mean_of_identical_reports() {
        let (img, maps, masks) = fixture(false);
        let r = evaluate(&img, &maps, &masks, 0.3).unwrap();
        let m = MetricsReport::mean(&[r, r]).unwrap();
        assert!((m.mad - r.mad).abs() < 1e-15);
    }
}
