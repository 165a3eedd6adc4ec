//! Same-padded 2-D convolutions and the Conv -> InstanceNorm -> SiLU unit.

use rayon::prelude::*;

use super::layers::{fan_in_uniform, silu_inplace, Norm};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    /// out x in x k x k
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Conv2d {
    pub fn init(rng: &mut Rng, input: usize, output: usize, kernel: usize) -> Self {
        let fan_in = input * kernel * kernel;
        Self {
            weight: fan_in_uniform(rng, &[output, input, kernel, kernel], fan_in),
            bias: fan_in_uniform(rng, &[output], fan_in),
        }
    }

    pub fn in_channels(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn out_channels(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn kernel(&self) -> usize {
        self.weight.shape()[2]
    }

    pub fn zero(&mut self) {
        self.weight.data_mut().fill(0.0);
        self.bias.data_mut().fill(0.0);
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (c, h, w) = x.dims3()?;
        let k = self.kernel();
        if c != self.in_channels() || k % 2 == 0 {
            return Err(Error::ShapeMismatch(format!(
                "conv {}->{} k={k} applied to {c} channels",
                self.in_channels(),
                self.out_channels()
            )));
        }
        let (hw, kk, pad) = (h * w, k * k, (k / 2) as isize);
        let (wt, bias, src) = (self.weight.data(), self.bias.data(), x.data());
        let mut out = vec![0.0f32; self.out_channels() * hw];
        out.par_chunks_mut(hw).enumerate().for_each(|(o, dst)| {
            for r in 0..h {
                for col in 0..w {
                    let mut acc = bias[o] as f64;
                    for i in 0..c {
                        let taps = &wt[(o * c + i) * kk..(o * c + i + 1) * kk];
                        let plane = &src[i * hw..(i + 1) * hw];
                        acc += window_dot(plane, h, w, r, col, taps, k, pad);
                    }
                    dst[r * w + col] = acc as f32;
                }
            }
        });
        Tensor::new(vec![self.out_channels(), h, w], out)
    }
}

/// Depth-wise convolution: one k x k filter per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct DwConv {
    /// c x k x k
    pub weight: Tensor,
    pub bias: Tensor,
}

impl DwConv {
    pub fn init(rng: &mut Rng, channels: usize, kernel: usize) -> Self {
        let fan_in = kernel * kernel;
        Self {
            weight: fan_in_uniform(rng, &[channels, kernel, kernel], fan_in),
            bias: fan_in_uniform(rng, &[channels], fan_in),
        }
    }

    pub fn channels(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn kernel(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        dwconv2d(x, &self.weight, &self.bias)
    }
}

/// Channel-independent same-padded convolution with per-channel `k x k`
/// weights (`weight` is C x k x k) and bias.
pub fn dwconv2d(x: &Tensor, weight: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (c, h, w) = x.dims3()?;
    let (wc, k) = match weight.shape() {
        &[wc, k, k2] if k == k2 && k % 2 == 1 => (wc, k),
        other => {
            return Err(Error::ShapeMismatch(format!(
                "depth-wise weight must be C x k x k with odd k, got {other:?}"
            )))
        }
    };
    if wc != c || bias.numel() != c {
        return Err(Error::ShapeMismatch(format!(
            "depth-wise conv over {wc} channels applied to {c}"
        )));
    }
    let (hw, kk, pad) = (h * w, k * k, (k / 2) as isize);
    let mut out = vec![0.0f32; c * hw];
    out.par_chunks_mut(hw)
        .zip(x.data().par_chunks(hw))
        .enumerate()
        .for_each(|(i, (dst, plane))| {
            let taps = &weight.data()[i * kk..(i + 1) * kk];
            for r in 0..h {
                for col in 0..w {
                    let acc = bias.data()[i] as f64 + window_dot(plane, h, w, r, col, taps, k, pad);
                    dst[r * w + col] = acc as f32;
                }
            }
        });
    Tensor::new(vec![c, h, w], out)
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn window_dot(
    plane: &[f32],
    h: usize,
    w: usize,
    r: usize,
    col: usize,
    taps: &[f32],
    k: usize,
    pad: isize,
) -> f64 {
    let mut acc = 0.0f64;
    for kr in 0..k {
        let sr = r as isize + kr as isize - pad;
        if sr < 0 || sr >= h as isize {
            continue;
        }
        let row = &plane[sr as usize * w..(sr as usize + 1) * w];
        for kc in 0..k {
            let sc = col as isize + kc as isize - pad;
            if sc < 0 || sc >= w as isize {
                continue;
            }
            acc += taps[kr * k + kc] as f64 * row[sc as usize] as f64;
        }
    }
    acc
}

/// Conv2D -> InstanceNorm2D -> SiLU.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvBParams {
    pub conv: Conv2d,
    pub norm: Norm,
}

impl ConvBParams {
    pub fn init(rng: &mut Rng, input: usize, output: usize, kernel: usize) -> Self {
        Self {
            conv: Conv2d::init(rng, input, output, kernel),
            norm: Norm::identity(output),
        }
    }

    pub fn in_channels(&self) -> usize {
        self.conv.in_channels()
    }

    pub fn out_channels(&self) -> usize {
        self.conv.out_channels()
    }
}

pub fn conv_block(x: &Tensor, p: &ConvBParams) -> Result<Tensor> {
    let mut y = p.norm.instance_norm(&p.conv.forward(x)?)?;
    silu_inplace(&mut y);
    Ok(y)
}

/// Depth-wise convolution followed by InstanceNorm and SiLU.
pub fn dwconv_block(x: &Tensor, conv: &DwConv, norm: &Norm) -> Result<Tensor> {
    let mut y = norm.instance_norm(&conv.forward(x)?)?;
    silu_inplace(&mut y);
    Ok(y)
}

/// 2 x 2 average pooling with stride 2; extents must be even.
pub fn avg_pool2(x: &Tensor) -> Result<Tensor> {
    let (c, h, w) = x.dims3()?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::ShapeMismatch(format!("cannot pool odd extent {h}x{w}")));
    }
    let (oh, ow) = (h / 2, w / 2);
    let src = x.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    for i in 0..c {
        for r in 0..oh {
            for col in 0..ow {
                let at = |dr: usize, dc: usize| src[i * h * w + (2 * r + dr) * w + 2 * col + dc] as f64;
                out.push(((at(0, 0) + at(0, 1) + at(1, 0) + at(1, 1)) / 4.0) as f32);
            }
        }
    }
    Tensor::new(vec![c, oh, ow], out)
}

/// Nearest-neighbour 2x upsampling.
pub fn upsample_nearest2(x: &Tensor) -> Result<Tensor> {
    let (c, h, w) = x.dims3()?;
    let (oh, ow) = (2 * h, 2 * w);
    let src = x.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    for i in 0..c {
        for r in 0..oh {
            for col in 0..ow {
                out.push(src[i * h * w + (r / 2) * w + col / 2]);
            }
        }
    }
    Tensor::new(vec![c, oh, ow], out)
}
