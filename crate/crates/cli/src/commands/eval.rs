use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use mambaad_core::io::{load_mask, load_tensor};
use mambaad_core::metrics::{evaluate, LabeledScores, MetricsReport, DEFAULT_FPR_LIMIT};
use mambaad_core::pipeline::image_score;
use mambaad_core::{BinaryMask, Tensor};
use serde::{Deserialize, Serialize};

use super::forward::Record;
use super::write_json;
use crate::exit::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PixelAggregation {
    /// Pool pixels of all samples.
    Pooled,
    /// Evaluate each category separately and average the reports.
    PerCategory,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the table row (percent, one decimal) here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_FPR_LIMIT)]
    pub fpr_limit: f64,
    #[arg(long, value_enum, default_value = "pooled")]
    pub pixel_agg: PixelAggregation,
    /// Smoothing used when a sample has neither image score nor record.
    #[arg(long, default_value_t = 4.0)]
    pub sigma: f64,
}

#[derive(Debug, Deserialize)]
pub struct Manifest {
    pub samples: Vec<Sample>,
}

/// One evaluation sample. Paths are relative to the manifest. The image
/// score comes from `image_score`, else from the forward record, else from
/// the map itself.
#[derive(Debug, Deserialize)]
pub struct Sample {
    #[serde(default)]
    pub name: Option<String>,
    pub score_map: PathBuf,
    /// Missing mask means an all-normal image.
    #[serde(default)]
    pub mask: Option<PathBuf>,
    #[serde(default)]
    pub image_score: Option<f64>,
    #[serde(default)]
    pub record: Option<PathBuf>,
    pub label: u8,
    #[serde(default)]
    pub category: Option<String>,
    #[serde(default)]
    pub mask_positives: Option<usize>,
}

struct Loaded {
    category: String,
    map: Tensor,
    mask: BinaryMask,
    score: f64,
    label: bool,
}

#[derive(Debug, Serialize)]
pub struct EvalOutput {
    #[serde(flatten)]
    pub report: MetricsReport,
    pub pixel_aggregation: PixelAggregation,
    pub fpr_limit: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub categories: Option<BTreeMap<String, MetricsReport>>,
}

fn load_sample(base: &Path, i: usize, s: &Sample, sigma: f64) -> anyhow::Result<Loaded> {
    let name = s.name.clone().unwrap_or_else(|| format!("sample {i}"));
    let label = match s.label {
        0 => false,
        1 => true,
        l => bail!("{name}: label must be 0 or 1, got {l}"),
    };
    let map_path = base.join(&s.score_map);
    let map = load_tensor(&map_path).with_context(|| format!("{name}: score map {}", map_path.display()))?;
    let map = match map.shape() {
        [1, h, w] => {
            let (h, w) = (*h, *w);
            map.reshape(vec![h, w])?
        }
        [_, _] => map,
        other => bail!("{name}: score map must be HxW, got {other:?}"),
    };
    let (h, w) = map.dims2()?;
    let mask = match &s.mask {
        Some(p) => {
            let path = base.join(p);
            load_mask(&path).with_context(|| format!("{name}: mask {}", path.display()))?
        }
        None => BinaryMask::zeros(h, w)?,
    };
    if (mask.height(), mask.width()) != (h, w) {
        bail!("{name}: mask is {}x{}, score map {h}x{w}", mask.height(), mask.width());
    }
    if let Some(n) = s.mask_positives {
        if n != mask.count_positive() {
            bail!("{name}: manifest lists {n} mask positives, mask has {}", mask.count_positive());
        }
    }
    let score = match (s.image_score, &s.record) {
        (Some(v), _) => v,
        (None, Some(r)) => {
            let path = base.join(r);
            let text = fs::read_to_string(&path).with_context(|| format!("{name}: record {}", path.display()))?;
            let rec: Record =
                serde_json::from_str(&text).with_context(|| format!("{name}: record {}", path.display()))?;
            rec.image_score
        }
        (None, None) => image_score(&map, sigma)?,
    };
    Ok(Loaded {
        category: s.category.clone().unwrap_or_else(|| "default".into()),
        map,
        mask,
        score,
        label,
    })
}

fn evaluate_group(samples: &[&Loaded], fpr_limit: f64) -> anyhow::Result<MetricsReport> {
    let scores = LabeledScores::new(
        samples.iter().map(|s| s.score).collect(),
        samples.iter().map(|s| s.label).collect(),
    )?;
    let maps: Vec<Tensor> = samples.iter().map(|s| s.map.clone()).collect();
    let masks: Vec<BinaryMask> = samples.iter().map(|s| s.mask.clone()).collect();
    Ok(evaluate(&scores, &maps, &masks, fpr_limit)?)
}

pub fn compute(a: &Args) -> anyhow::Result<EvalOutput> {
    if !(a.fpr_limit > 0.0 && a.fpr_limit <= 1.0) {
        bail!("--fpr-limit must lie in (0, 1], got {}", a.fpr_limit);
    }
    let text = fs::read_to_string(&a.manifest).with_context(|| format!("reading manifest {}", a.manifest.display()))?;
    let manifest: Manifest =
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", a.manifest.display()))?;
    if manifest.samples.is_empty() {
        bail!("manifest {} lists no samples", a.manifest.display());
    }
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let loaded = manifest
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| load_sample(base, i, s, a.sigma))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let (report, categories) = match a.pixel_agg {
        PixelAggregation::Pooled => (evaluate_group(&loaded.iter().collect::<Vec<_>>(), a.fpr_limit)?, None),
        PixelAggregation::PerCategory => {
            let mut groups: BTreeMap<String, Vec<&Loaded>> = BTreeMap::new();
            for s in &loaded {
                groups.entry(s.category.clone()).or_default().push(s);
            }
            let mut per = BTreeMap::new();
            for (name, group) in groups {
                let r = evaluate_group(&group, a.fpr_limit).with_context(|| format!("category {name}"))?;
                per.insert(name, r);
            }
            let reports: Vec<MetricsReport> = per.values().copied().collect();
            let mean = MetricsReport::mean(&reports)?;
            (mean, Some(per.into_iter().map(|(k, r)| (k, r.rounded(6))).collect()))
        }
    };
    Ok(EvalOutput {
        report: report.rounded(6),
        pixel_aggregation: a.pixel_agg,
        fpr_limit: a.fpr_limit,
        samples: loaded.len(),
        categories,
    })
}

pub fn run(a: &Args) -> anyhow::Result<Status> {
    let out = compute(a)?;
    write_json(&a.out, &out)?;
    let row = out.report.csv_row();
    if let Some(path) = &a.csv {
        let text = format!("{}\n{}\n", MetricsReport::CSV_HEADER, row);
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    super::emit(&format!("{row}\n"))?;
    Ok(Status::Ok)
}
