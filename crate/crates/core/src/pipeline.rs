//! Multi-scale reconstruction pipeline: fuse the encoder pyramid, decode it
//! with stages of LSS modules, and score the reconstruction.
//!
//! Decoder layout for `stage_depths = [d_0, .., d_{S-1}]` (S >= 3) over a
//! pyramid with channels (C1, C2, C3) at (H, H/2, H/4):
//!
//! ```text
//! fused (C3, H/4)
//!   stages 0..S-3   at H/4, C3
//!   stage  S-3      at H/4, C3   -> tap, deepest scale
//!   up2x + ConvB1x1 -> C2
//!   stage  S-2      at H/2, C2   -> tap
//!   up2x + ConvB1x1 -> C1
//!   stage  S-1      at H,   C1   -> tap, finest scale
//! ```

use serde::{Deserialize, Serialize};

use crate::blocks::{
    avg_pool2, conv_block, lss_forward, upsample_nearest2, ConvBParams, LssConfig, LssParams,
};
use crate::blocks::layers::concat_channels;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scan::{ScanDirection, ScanMethod};
use crate::tensor::{bilinear_resize, Tensor};

pub const SCALES: usize = 3;
/// Cosine guard: vectors with a smaller norm count as zero.
pub const ZERO_NORM: f64 = 1e-12;
pub const SMOOTHING_RADIUS: usize = 2;

/// Three feature maps at dyadic scales, finest first.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePyramid {
    scales: [Tensor; SCALES],
}

impl FeaturePyramid {
    pub fn new(scales: [Tensor; SCALES]) -> Result<Self> {
        let (_, h, w) = scales[0].dims3()?;
        if !h.is_power_of_two() || !w.is_power_of_two() || h < 4 || w < 4 {
            return Err(Error::ShapeMismatch(format!(
                "finest scale must have power-of-two extents >= 4, got {h}x{w}"
            )));
        }
        for (i, s) in scales.iter().enumerate() {
            let (_, sh, sw) = s.dims3()?;
            if (sh, sw) != (h >> i, w >> i) {
                return Err(Error::ShapeMismatch(format!(
                    "scale {i} is {sh}x{sw}, expected {}x{}",
                    h >> i,
                    w >> i
                )));
            }
        }
        Ok(Self { scales })
    }

    pub fn scales(&self) -> &[Tensor; SCALES] {
        &self.scales
    }

    pub fn into_scales(self) -> [Tensor; SCALES] {
        self.scales
    }

    pub fn channels(&self) -> [usize; SCALES] {
        [0, 1, 2].map(|i| self.scales[i].shape()[0])
    }

    /// Extents of the finest scale.
    pub fn size(&self) -> (usize, usize) {
        (self.scales[0].shape()[1], self.scales[0].shape()[2])
    }

    fn check_matches(&self, other: &FeaturePyramid) -> Result<()> {
        for (i, (a, b)) in self.scales.iter().zip(&other.scales).enumerate() {
            if a.shape() != b.shape() {
                return Err(Error::ShapeMismatch(format!(
                    "scale {i}: {:?} vs {:?}",
                    a.shape(),
                    b.shape()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MapFusion {
    /// Resize every per-scale map to the output size, then sum.
    #[default]
    ResizeThenSum,
    /// Resize to the finest scale, sum there, then resize to the output size.
    SumThenResize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecoderConfig {
    /// LSS modules per stage.
    pub stage_depths: Vec<usize>,
    /// Cascaded HSS blocks inside every LSS module of each stage.
    pub hss_blocks: Vec<usize>,
    pub expansion: usize,
    pub state_size: usize,
    pub scan_method: ScanMethod,
    pub directions: Vec<ScanDirection>,
    pub local_kernels: Vec<usize>,
    pub seed: u64,
    pub smoothing_sigma: f64,
    pub map_fusion: MapFusion,
    /// Output anomaly map size; defaults to the finest scale.
    pub map_size: Option<[usize; 2]>,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            stage_depths: vec![3, 4, 6, 3],
            hss_blocks: vec![3, 2, 3, 3],
            expansion: 2,
            state_size: 16,
            scan_method: ScanMethod::Hilbert,
            directions: ScanDirection::ALL.to_vec(),
            local_kernels: vec![5, 7],
            seed: 0,
            smoothing_sigma: 4.0,
            map_fusion: MapFusion::ResizeThenSum,
            map_size: None,
        }
    }
}

impl DecoderConfig {
    /// Depth `[1, 1, 1, 1]`, one HSS block per module.
    pub fn micro() -> Self {
        Self {
            stage_depths: vec![1, 1, 1, 1],
            hss_blocks: vec![1, 1, 1, 1],
            state_size: 4,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.stage_depths.len();
        if s < SCALES {
            return Err(Error::InvalidConfig(format!(
                "at least {SCALES} decoder stages required, got {s}"
            )));
        }
        if self.stage_depths.contains(&0) {
            return Err(Error::InvalidConfig("stage depths must be positive".into()));
        }
        if self.hss_blocks.len() != s || self.hss_blocks.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "hss_blocks needs {s} positive entries, got {:?}",
                self.hss_blocks
            )));
        }
        if self.expansion == 0 || self.state_size == 0 {
            return Err(Error::InvalidConfig("expansion and state size must be >= 1".into()));
        }
        if self.directions.is_empty() || self.directions.len() > ScanDirection::ALL.len() {
            return Err(Error::InvalidConfig("between 1 and 8 directions required".into()));
        }
        if !(self.smoothing_sigma > 0.0) {
            return Err(Error::InvalidConfig("smoothing sigma must be positive".into()));
        }
        if let Some([h, w]) = self.map_size {
            if h == 0 || w == 0 {
                return Err(Error::InvalidConfig("map size must be positive".into()));
            }
        }
        Ok(())
    }

    /// Channel count each stage runs at.
    pub fn stage_channels(&self, pyramid_channels: [usize; SCALES]) -> Vec<usize> {
        let s = self.stage_depths.len();
        (0..s)
            .map(|i| match s - 1 - i {
                0 => pyramid_channels[0],
                1 => pyramid_channels[1],
                _ => pyramid_channels[2],
            })
            .collect()
    }

    fn lss(&self, stage: usize, channels: usize) -> LssConfig {
        LssConfig {
            channels,
            hss_blocks: self.hss_blocks[stage],
            expansion: self.expansion,
            state_size: self.state_size,
            method: self.scan_method,
            directions: self.directions.clone(),
            local_kernels: self.local_kernels.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    /// (C1 + C2 + C3) -> C3, kernel 1.
    pub hfpn: ConvBParams,
    pub stages: Vec<Vec<LssParams>>,
    /// Upsampling heads between the last three stages.
    pub transitions: Vec<ConvBParams>,
}

impl PipelineParams {
    pub fn init(cfg: &DecoderConfig, channels: [usize; SCALES]) -> Result<Self> {
        cfg.validate()?;
        let mut rng = Rng::new(cfg.seed);
        let [c1, c2, c3] = channels;
        let hfpn = ConvBParams::init(&mut rng, c1 + c2 + c3, c3, 1);
        let stage_ch = cfg.stage_channels(channels);
        let mut stages = Vec::with_capacity(stage_ch.len());
        for (i, (&depth, &ch)) in cfg.stage_depths.iter().zip(&stage_ch).enumerate() {
            let lss = cfg.lss(i, ch);
            stages.push(
                (0..depth)
                    .map(|_| LssParams::init(&lss, &mut rng))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let transitions = vec![
            ConvBParams::init(&mut rng, c3, c2, 1),
            ConvBParams::init(&mut rng, c2, c1, 1),
        ];
        Ok(Self {
            hfpn,
            stages,
            transitions,
        })
    }
}

/// Pool the two finer scales down to the deepest resolution, concatenate and
/// project to the deepest channel count with a 1x1 ConvB.
pub fn hfpn_fuse(p: &FeaturePyramid, params: &ConvBParams) -> Result<Tensor> {
    let [s1, s2, s3] = p.scales();
    let s1 = avg_pool2(&avg_pool2(s1)?)?;
    let s2 = avg_pool2(s2)?;
    conv_block(&concat_channels(&[&s1, &s2, s3])?, params)
}

pub fn decoder_forward(fused: &Tensor, cfg: &DecoderConfig, params: &PipelineParams) -> Result<FeaturePyramid> {
    let s = params.stages.len();
    if s != cfg.stage_depths.len() || params.transitions.len() != SCALES - 1 {
        return Err(Error::InvalidParameter(format!(
            "parameters hold {s} stages and {} transitions for a {}-stage config",
            params.transitions.len(),
            cfg.stage_depths.len()
        )));
    }
    let mut x = fused.clone();
    let mut taps = Vec::with_capacity(SCALES);
    for (i, stage) in params.stages.iter().enumerate() {
        let tap_index = (i + SCALES).checked_sub(s);
        if let Some(t) = tap_index.filter(|&t| t > 0) {
            x = conv_block(&upsample_nearest2(&x)?, &params.transitions[t - 1])?;
        }
        for lss in stage {
            x = lss_forward(&x, lss)?;
        }
        if tap_index.is_some() {
            taps.push(x.clone());
        }
    }
    let mut taps = taps.into_iter().rev();
    let (a, b, c) = (taps.next(), taps.next(), taps.next());
    match (a, b, c) {
        (Some(a), Some(b), Some(c)) => FeaturePyramid::new([a, b, c]),
        _ => unreachable!("three taps from three final stages"),
    }
}

/// Sum over scales of the per-element mean squared error.
pub fn mse_loss(enc: &FeaturePyramid, dec: &FeaturePyramid) -> Result<f64> {
    enc.check_matches(dec)?;
    Ok(enc
        .scales()
        .iter()
        .zip(dec.scales())
        .map(|(a, b)| {
            let sum: f64 = a
                .data()
                .iter()
                .zip(b.data())
                .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
                .sum();
            sum / a.numel() as f64
        })
        .sum())
}

/// `1 - cos` between channel vectors at every pixel of one scale.
pub fn cosine_distance_map(enc: &Tensor, dec: &Tensor) -> Result<Tensor> {
    if enc.shape() != dec.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            enc.shape(),
            dec.shape()
        )));
    }
    let (c, h, w) = enc.dims3()?;
    let hw = h * w;
    let (a, b) = (enc.data(), dec.data());
    let data = (0..hw)
        .map(|p| {
            let (mut na, mut nb) = (0.0f64, 0.0f64);
            for i in 0..c {
                na += (a[i * hw + p] as f64).powi(2);
                nb += (b[i * hw + p] as f64).powi(2);
            }
            let (na, nb) = (na.sqrt(), nb.sqrt());
            let dist = match (na < ZERO_NORM, nb < ZERO_NORM) {
                (true, true) => 0.0,
                (true, false) | (false, true) => 1.0,
                // 1 - cos = |a/|a| - b/|b||^2 / 2, exact zero for equal inputs.
                (false, false) => {
                    let sq: f64 = (0..c)
                        .map(|i| (a[i * hw + p] as f64 / na - b[i * hw + p] as f64 / nb).powi(2))
                        .sum();
                    (sq / 2.0).clamp(0.0, 2.0)
                }
            };
            dist as f32
        })
        .collect();
    Tensor::new(vec![h, w], data)
}

/// Normalized 1-D Gaussian taps of radius [`SMOOTHING_RADIUS`].
pub fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let r = SMOOTHING_RADIUS as isize;
    let raw: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Separable 5x5 Gaussian smoothing; taps falling outside the map are dropped
/// and the remaining weights renormalized.
pub fn gaussian_smooth(map: &Tensor, sigma: f64) -> Result<Tensor> {
    let (h, w) = map.dims2()?;
    let taps = gaussian_taps(sigma);
    let r = SMOOTHING_RADIUS as isize;
    let pass = |src: &[f64], along_rows: bool| -> Vec<f64> {
        let mut out = vec![0.0; h * w];
        for y in 0..h {
            for x in 0..w {
                let (mut acc, mut wsum) = (0.0, 0.0);
                for (k, &t) in taps.iter().enumerate() {
                    let off = k as isize - r;
                    let (yy, xx) = if along_rows {
                        (y as isize, x as isize + off)
                    } else {
                        (y as isize + off, x as isize)
                    };
                    if yy >= 0 && yy < h as isize && xx >= 0 && xx < w as isize {
                        acc += t * src[yy as usize * w + xx as usize];
                        wsum += t;
                    }
                }
                out[y * w + x] = acc / wsum;
            }
        }
        out
    };
    let src: Vec<f64> = map.data().iter().map(|&v| v as f64).collect();
    let smoothed = pass(&pass(&src, true), false);
    Tensor::new(vec![h, w], smoothed.into_iter().map(|v| v as f32).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyScoreMap {
    /// H x W, non-negative.
    pub map: Tensor,
    /// Maximum of the Gaussian-smoothed map.
    pub image_score: f64,
}

pub fn image_score(map: &Tensor, sigma: f64) -> Result<f64> {
    Ok(gaussian_smooth(map, sigma)?
        .data()
        .iter()
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v as f64)))
}

pub fn anomaly_map(
    enc: &FeaturePyramid,
    dec: &FeaturePyramid,
    out_h: usize,
    out_w: usize,
    sigma: f64,
    fusion: MapFusion,
) -> Result<AnomalyScoreMap> {
    enc.check_matches(dec)?;
    let per_scale = enc
        .scales()
        .iter()
        .zip(dec.scales())
        .map(|(a, b)| cosine_distance_map(a, b))
        .collect::<Result<Vec<_>>>()?;
    let sum_at = |h: usize, w: usize| -> Result<Tensor> {
        let mut acc = vec![0.0f32; h * w];
        for m in &per_scale {
            let r = bilinear_resize(m, h, w)?;
            acc.iter_mut().zip(r.data()).for_each(|(a, v)| *a += v);
        }
        Tensor::new(vec![h, w], acc)
    };
    let map = match fusion {
        MapFusion::ResizeThenSum => sum_at(out_h, out_w)?,
        MapFusion::SumThenResize => {
            let (h, w) = enc.size();
            bilinear_resize(&sum_at(h, w)?, out_h, out_w)?
        }
    };
    let image_score = image_score(&map, sigma)?;
    Ok(AnomalyScoreMap { map, image_score })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub loss: f64,
    pub scores: AnomalyScoreMap,
    pub reconstruction: FeaturePyramid,
}

/// Fuse, decode, and score the reconstruction against the input pyramid.
pub fn pipeline_forward(p: &FeaturePyramid, cfg: &DecoderConfig, params: &PipelineParams) -> Result<PipelineOutput> {
    cfg.validate()?;
    let fused = hfpn_fuse(p, &params.hfpn)?;
    let reconstruction = decoder_forward(&fused, cfg, params)?;
    score_reconstruction(p, reconstruction, cfg)
}

/// Loss and anomaly map of a given reconstruction.
pub fn score_reconstruction(
    p: &FeaturePyramid,
    reconstruction: FeaturePyramid,
    cfg: &DecoderConfig,
) -> Result<PipelineOutput> {
    let loss = mse_loss(p, &reconstruction)?;
    let (h, w) = cfg.map_size.map_or(p.size(), |[h, w]| (h, w));
    let scores = anomaly_map(p, &reconstruction, h, w, cfg.smoothing_sigma, cfg.map_fusion)?;
    Ok(PipelineOutput {
        loss,
        scores,
        reconstruction,
    })
}
