use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use mambaad_core::io::{load_tensor, save_tensor};
use mambaad_core::params::{load_params, save_params};
use mambaad_core::pipeline::{
    pipeline_forward, score_reconstruction, DecoderConfig, FeaturePyramid, PipelineParams,
};
use serde::{Deserialize, Serialize};

use super::write_json;
use crate::exit::Status;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Feature maps finest first: C1xHxW, C2xH/2xW/2, C3xH/4xW/4.
    #[arg(long, num_args = 3, value_names = ["FINE", "MID", "DEEP"], required = true)]
    pub pyramid: Vec<PathBuf>,
    /// Decoder config JSON; omitted fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parameter directory to load instead of seeded initialization.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Write the parameters used to this directory.
    #[arg(long)]
    pub save_params: Option<PathBuf>,
    #[arg(long)]
    pub out_map: PathBuf,
    #[arg(long)]
    pub out_json: PathBuf,
    /// Skip decoding and score the pyramid against itself.
    #[arg(long)]
    pub identity_decoder: bool,
    #[arg(long, requires = "out_w")]
    pub out_h: Option<usize>,
    #[arg(long, requires = "out_h")]
    pub out_w: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Record {
    pub loss: f64,
    pub image_score: f64,
}

pub fn load_config(path: Option<&Path>) -> anyhow::Result<DecoderConfig> {
    let cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None => DecoderConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_pyramid(paths: &[PathBuf]) -> anyhow::Result<FeaturePyramid> {
    let mut scales = Vec::with_capacity(3);
    for (i, p) in paths.iter().enumerate() {
        scales.push(load_tensor(p).with_context(|| format!("reading pyramid scale {i} from {}", p.display()))?);
    }
    let scales: [_; 3] = scales
        .try_into()
        .map_err(|_| anyhow::anyhow!("exactly three pyramid files required"))?;
    FeaturePyramid::new(scales).with_context(|| {
        let names: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
        format!("pyramid {}", names.join(", "))
    })
}

pub fn run(a: &Args) -> anyhow::Result<Status> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let (Some(h), Some(w)) = (a.out_h, a.out_w) {
        cfg.map_size = Some([h, w]);
        cfg.validate()?;
    }
    let pyramid = load_pyramid(&a.pyramid)?;
    let out = if a.identity_decoder {
        score_reconstruction(&pyramid, pyramid.clone(), &cfg)?
    } else {
        let mut params = PipelineParams::init(&cfg, pyramid.channels())?;
        if let Some(dir) = &a.params {
            load_params(dir, &mut params).with_context(|| format!("loading parameters from {}", dir.display()))?;
        }
        if let Some(dir) = &a.save_params {
            save_params(dir, &params).with_context(|| format!("saving parameters to {}", dir.display()))?;
        }
        pipeline_forward(&pyramid, &cfg, &params)?
    };
    if let Some(dir) = a.out_map.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_tensor(&a.out_map, &out.scores.map)?;
    write_json(
        &a.out_json,
        &Record {
            loss: out.loss,
            image_score: out.scores.image_score,
        },
    )?;
    Ok(Status::Ok)
}
