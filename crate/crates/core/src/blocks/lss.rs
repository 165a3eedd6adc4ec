//! Locality-enhanced State Space module: cascaded HSS blocks for global
//! context, parallel depth-wise conv branches for local context, fused by a
//! 1x1 convolution with a residual connection.

use super::conv::{conv_block, dwconv_block, ConvBParams, Conv2d, DwConv};
use super::hss::{hss_forward, HssConfig, HssParams};
use super::layers::{add, concat_channels, Norm};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::scan::{ScanDirection, ScanMethod};
use crate::tensor::Tensor;

pub const DEFAULT_LOCAL_KERNELS: [usize; 2] = [5, 7];

#[derive(Debug, Clone, PartialEq)]
pub struct LssConfig {
    pub channels: usize,
    /// Number of cascaded HSS blocks.
    pub hss_blocks: usize,
    pub expansion: usize,
    pub state_size: usize,
    pub method: ScanMethod,
    pub directions: Vec<ScanDirection>,
    pub local_kernels: Vec<usize>,
}

impl LssConfig {
    pub fn new(channels: usize) -> Self {
        Self {
            channels,
            hss_blocks: 3,
            expansion: 2,
            state_size: 16,
            method: ScanMethod::Hilbert,
            directions: ScanDirection::ALL.to_vec(),
            local_kernels: DEFAULT_LOCAL_KERNELS.to_vec(),
        }
    }

    fn hss(&self) -> HssConfig {
        HssConfig {
            channels: self.channels,
            expansion: self.expansion,
            state_size: self.state_size,
            method: self.method,
            directions: self.directions.clone(),
        }
    }
}

/// 1x1 ConvB -> k x k depth-wise ConvB -> 1x1 ConvB.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBranch {
    pub conv_in: ConvBParams,
    pub dw: DwConv,
    pub dw_norm: Norm,
    pub conv_out: ConvBParams,
}

impl LocalBranch {
    pub fn init(rng: &mut Rng, channels: usize, kernel: usize) -> Self {
        Self {
            conv_in: ConvBParams::init(rng, channels, channels, 1),
            dw: DwConv::init(rng, channels, kernel),
            dw_norm: Norm::identity(channels),
            conv_out: ConvBParams::init(rng, channels, channels, 1),
        }
    }

    pub fn kernel(&self) -> usize {
        self.dw.kernel()
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let y = conv_block(x, &self.conv_in)?;
        let y = dwconv_block(&y, &self.dw, &self.dw_norm)?;
        conv_block(&y, &self.conv_out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LssParams {
    pub hss: Vec<HssParams>,
    pub branches: Vec<LocalBranch>,
    /// (1 + branches) * C -> C, kernel 1.
    pub fuse: Conv2d,
}

impl LssParams {
    pub fn init(cfg: &LssConfig, rng: &mut Rng) -> Result<Self> {
        if cfg.hss_blocks == 0 {
            return Err(Error::InvalidConfig("an LSS module needs at least one HSS block".into()));
        }
        if let Some(k) = cfg.local_kernels.iter().find(|&&k| k % 2 == 0) {
            return Err(Error::InvalidConfig(format!("local kernel size {k} must be odd")));
        }
        let hss_cfg = cfg.hss();
        let hss = (0..cfg.hss_blocks)
            .map(|_| HssParams::init(&hss_cfg, rng))
            .collect::<Result<_>>()?;
        let branches = cfg
            .local_kernels
            .iter()
            .map(|&k| LocalBranch::init(rng, cfg.channels, k))
            .collect();
        let fuse_in = (1 + cfg.local_kernels.len()) * cfg.channels;
        Ok(Self {
            hss,
            branches,
            fuse: Conv2d::init(rng, fuse_in, cfg.channels, 1),
        })
    }

    pub fn channels(&self) -> usize {
        self.fuse.out_channels()
    }
}

/// Deterministic parameters for one LSS module from a seed.
pub fn init_block_params(cfg: &LssConfig, seed: u64) -> Result<LssParams> {
    LssParams::init(cfg, &mut Rng::new(seed))
}

pub fn lss_forward(x: &Tensor, p: &LssParams) -> Result<Tensor> {
    let (c, _, _) = x.dims3()?;
    if c != p.channels() || p.fuse.in_channels() != (1 + p.branches.len()) * c {
        return Err(Error::ShapeMismatch(format!(
            "LSS module for {} channels applied to {c}",
            p.channels()
        )));
    }
    let mut global = x.clone();
    for block in &p.hss {
        global = hss_forward(&global, block)?;
    }
    let locals = p
        .branches
        .iter()
        .map(|b| b.forward(x))
        .collect::<Result<Vec<_>>>()?;
    let mut parts = vec![&global];
    parts.extend(locals.iter());
    let fused = p.fuse.forward(&concat_channels(&parts)?)?;
    add(x, &fused)
}
