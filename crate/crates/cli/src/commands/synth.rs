use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use mambaad_core::io::{save_mask, save_tensor};
use mambaad_core::synth::{fixture_sample, Anomaly};
use serde::Serialize;

use super::write_json;
use crate::exit::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Smooth random pyramids; odd samples carry a planted square or blob.
    Fixture,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum, default_value = "fixture")]
    pub kind: Kind,
    /// Finest-scale side (power of two, >= 8).
    #[arg(long, default_value_t = 16)]
    pub size: usize,
    /// One channel count for all scales, or three comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub channels: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub const MANIFEST: &str = "manifest.json";
pub const ORACLE_MANIFEST: &str = "oracle_manifest.json";

#[derive(Debug, Serialize)]
struct SampleEntry {
    name: String,
    pyramid: [String; 3],
    mask: String,
    label: u8,
    category: &'static str,
    mask_positives: usize,
    anomaly: Option<&'static str>,
    /// Where `forward` is expected to write this sample's outputs.
    score_map: String,
    record: String,
}

#[derive(Debug, Serialize)]
struct OracleEntry {
    name: String,
    score_map: String,
    mask: String,
    image_score: f64,
    label: u8,
    category: &'static str,
    mask_positives: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<T> {
    kind: &'static str,
    seed: u64,
    size: usize,
    channels: [usize; 3],
    samples: Vec<T>,
}

impl<T> Manifest<T> {
    fn new(a: &Args, channels: [usize; 3], samples: Vec<T>) -> Self {
        Self {
            kind: "fixture",
            seed: a.seed,
            size: a.size,
            channels,
            samples,
        }
    }
}

fn save(dir: &Path, rel: &str, f: impl FnOnce(&Path) -> mambaad_core::Result<()>) -> anyhow::Result<String> {
    let path = dir.join(rel);
    f(&path).with_context(|| format!("writing {}", path.display()))?;
    Ok(rel.to_string())
}

pub fn run(a: &Args) -> anyhow::Result<Status> {
    let channels = match a.channels.as_slice() {
        [c] => [*c; 3],
        [a, b, c] => [*a, *b, *c],
        other => bail!("--channels takes one or three values, got {}", other.len()),
    };
    if a.count == 0 {
        bail!("--count must be at least 1");
    }
    for sub in ["", "oracle"] {
        let d = a.out.join(sub);
        fs::create_dir_all(&d).with_context(|| format!("creating {}", d.display()))?;
    }
    let mut samples = Vec::with_capacity(a.count);
    let mut oracle = Vec::with_capacity(a.count);
    for i in 0..a.count {
        let s = fixture_sample(a.seed, i, a.size, channels)?;
        let name = format!("sample_{i:03}");
        let dir = a.out.join(&name);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let scales = s.pyramid.scales();
        let pyramid = [0, 1, 2].map(|k| format!("{name}/scale{k}.mbt"));
        for (k, rel) in pyramid.iter().enumerate() {
            save(&a.out, rel, |p| save_tensor(p, &scales[k]))?;
        }
        let mask = save(&a.out, &format!("{name}/mask.pgm"), |p| save_mask(p, &s.mask))?;
        let oracle_map = save(&a.out, &format!("oracle/{name}.mbt"), |p| save_tensor(p, &s.mask.to_tensor()))?;
        let label = u8::from(s.is_anomalous());
        let positives = s.mask.count_positive();
        samples.push(SampleEntry {
            name: name.clone(),
            pyramid,
            mask: mask.clone(),
            label,
            category: "fixture",
            mask_positives: positives,
            anomaly: s.anomaly.map(|k| match k {
                Anomaly::Square => "square",
                Anomaly::Blob => "blob",
            }),
            score_map: format!("outputs/{name}.mbt"),
            record: format!("outputs/{name}.json"),
        });
        oracle.push(OracleEntry {
            name,
            score_map: oracle_map,
            mask,
            image_score: label as f64,
            label,
            category: "fixture",
            mask_positives: positives,
        });
    }
    write_json(&a.out.join(MANIFEST), &Manifest::new(a, channels, samples))?;
    write_json(&a.out.join(ORACLE_MANIFEST), &Manifest::new(a, channels, oracle))?;
    Ok(Status::Ok)
}
