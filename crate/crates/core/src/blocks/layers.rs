//! Per-pixel and per-channel layers on C x H x W maps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::Tensor;

pub const NORM_EPS: f64 = 1e-5;

pub fn silu(v: f32) -> f32 {
    let v = v as f64;
    (v / (1.0 + (-v).exp())) as f32
}

pub fn silu_inplace(t: &mut Tensor) {
    t.data_mut().iter_mut().for_each(|v| *v = silu(*v));
}

/// Uniform in [-s, s] with `s = 1 / sqrt(fan_in)`.
pub(crate) fn fan_in_uniform(rng: &mut Rng, shape: &[usize], fan_in: usize) -> Tensor {
    let s = 1.0 / (fan_in as f32).sqrt();
    let n = shape.iter().product();
    let data = rng.uniform(n, -s, s).expect("s > 0");
    Tensor::new(shape.to_vec(), data).expect("shape is valid")
}

/// Fully connected map across the channel axis, applied at every pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    /// out x in
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Linear {
    pub fn init(rng: &mut Rng, input: usize, output: usize) -> Self {
        Self {
            weight: fan_in_uniform(rng, &[output, input], input),
            bias: fan_in_uniform(rng, &[output], input),
        }
    }

    pub fn in_features(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn out_features(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn zero(&mut self) {
        self.weight.data_mut().fill(0.0);
        self.bias.data_mut().fill(0.0);
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (c, h, w) = x.dims3()?;
        if c != self.in_features() {
            return Err(Error::ShapeMismatch(format!(
                "linear expects {} channels, got {c}",
                self.in_features()
            )));
        }
        let hw = h * w;
        let (wt, bias) = (self.weight.data(), self.bias.data());
        let mut out = vec![0.0f32; self.out_features() * hw];
        out.par_chunks_mut(hw).enumerate().for_each(|(o, dst)| {
            let row = &wt[o * c..(o + 1) * c];
            for (p, d) in dst.iter_mut().enumerate() {
                let mut acc = bias[o] as f64;
                for (i, &wi) in row.iter().enumerate() {
                    acc += wi as f64 * x.data()[i * hw + p] as f64;
                }
                *d = acc as f32;
            }
        });
        Tensor::new(vec![self.out_features(), h, w], out)
    }
}

/// Affine scale/shift applied after normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Norm {
    pub scale: Tensor,
    pub shift: Tensor,
}

impl Norm {
    pub fn identity(channels: usize) -> Self {
        Self {
            scale: Tensor::full(&[channels], 1.0).expect("channels >= 1"),
            shift: Tensor::zeros(&[channels]).expect("channels >= 1"),
        }
    }

    pub fn channels(&self) -> usize {
        self.scale.numel()
    }

    fn check(&self, c: usize) -> Result<()> {
        if c != self.channels() {
            return Err(Error::ShapeMismatch(format!(
                "norm has {} channels, input has {c}",
                self.channels()
            )));
        }
        Ok(())
    }

    /// Layer norm over the channel axis at each pixel.
    pub fn layer_norm(&self, x: &Tensor) -> Result<Tensor> {
        let (c, h, w) = x.dims3()?;
        self.check(c)?;
        let hw = h * w;
        let src = x.data();
        let mut out = vec![0.0f32; c * hw];
        for p in 0..hw {
            let mean = (0..c).map(|i| src[i * hw + p] as f64).sum::<f64>() / c as f64;
            let var = (0..c)
                .map(|i| (src[i * hw + p] as f64 - mean).powi(2))
                .sum::<f64>()
                / c as f64;
            let inv = 1.0 / (var + NORM_EPS).sqrt();
            for i in 0..c {
                let v = (src[i * hw + p] as f64 - mean) * inv;
                out[i * hw + p] =
                    (v * self.scale.data()[i] as f64 + self.shift.data()[i] as f64) as f32;
            }
        }
        Tensor::new(vec![c, h, w], out)
    }

    /// Instance norm: each channel normalized over its H x W plane.
    pub fn instance_norm(&self, x: &Tensor) -> Result<Tensor> {
        let (c, h, w) = x.dims3()?;
        self.check(c)?;
        let hw = h * w;
        let mut out = vec![0.0f32; c * hw];
        out.par_chunks_mut(hw)
            .zip(x.data().par_chunks(hw))
            .enumerate()
            .for_each(|(i, (dst, src))| {
                let mean = src.iter().map(|&v| v as f64).sum::<f64>() / hw as f64;
                let var = src.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / hw as f64;
                let inv = 1.0 / (var + NORM_EPS).sqrt();
                let (g, b) = (self.scale.data()[i] as f64, self.shift.data()[i] as f64);
                for (d, &v) in dst.iter_mut().zip(src) {
                    *d = ((v as f64 - mean) * inv * g + b) as f32;
                }
            });
        Tensor::new(vec![c, h, w], out)
    }
}

/// Concatenates C x H x W maps along the channel axis.
pub fn concat_channels(parts: &[&Tensor]) -> Result<Tensor> {
    let (_, h, w) = parts
        .first()
        .ok_or_else(|| Error::ShapeMismatch("nothing to concatenate".into()))?
        .dims3()?;
    let mut c_total = 0;
    let mut data = Vec::new();
    for p in parts {
        let (c, ph, pw) = p.dims3()?;
        if (ph, pw) != (h, w) {
            return Err(Error::ShapeMismatch(format!(
                "cannot concatenate {ph}x{pw} with {h}x{w}"
            )));
        }
        c_total += c;
        data.extend_from_slice(p.data());
    }
    Tensor::new(vec![c_total, h, w], data)
}

pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "cannot add {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect();
    Tensor::new(a.shape().to_vec(), data)
}

pub fn mul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "cannot multiply {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect();
    Tensor::new(a.shape().to_vec(), data)
}
