//! Dense row-major `f32` arrays and binary masks.
//!
//! Feature maps use channels x height x width, sequences use
//! channels x length, single maps use height x width.

use crate::error::{Error, Result};

pub const MAX_RANK: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        check_shape(&shape)?;
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(Error::DataLength {
                shape,
                data: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], value: f32) -> Result<Self> {
        check_shape(shape)?;
        let numel = shape.iter().product();
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![value; numel],
        })
    }

    pub fn from_fn(shape: &[usize], f: impl FnMut(usize) -> f32) -> Result<Self> {
        check_shape(shape)?;
        let numel = shape.iter().product();
        Ok(Self {
            shape: shape.to_vec(),
            data: (0..numel).map(f).collect(),
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    /// Interprets the tensor as channels x height x width.
    pub fn dims3(&self) -> Result<(usize, usize, usize)> {
        match self.shape[..] {
            [c, h, w] => Ok((c, h, w)),
            _ => Err(Error::ShapeMismatch(format!(
                "expected a C x H x W tensor, got shape {:?}",
                self.shape
            ))),
        }
    }

    /// Interprets the tensor as height x width.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape[..] {
            [h, w] => Ok((h, w)),
            [1, h, w] => Ok((h, w)),
            _ => Err(Error::ShapeMismatch(format!(
                "expected an H x W tensor, got shape {:?}",
                self.shape
            ))),
        }
    }

    /// Contiguous slice of channel `c` of a C x ... tensor.
    pub fn channel(&self, c: usize) -> &[f32] {
        let stride: usize = self.shape[1..].iter().product();
        &self.data[c * stride..(c + 1) * stride]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f32 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max)
    }
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() || shape.len() > MAX_RANK || shape.contains(&0) {
        return Err(Error::InvalidShape(shape.to_vec()));
    }
    Ok(())
}

/// Ground-truth mask, 1 = anomalous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<u8>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::ZeroExtent);
        }
        if bits.len() != height * width {
            return Err(Error::DataLength {
                shape: vec![height, width],
                data: bits.len(),
            });
        }
        if let Some(v) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!(
                "mask values must be 0 or 1, found {v}"
            )));
        }
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, vec![0; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.width + c] == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.bits[r * self.width + c] = value as u8;
    }

    pub fn count_positive(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor {
            shape: vec![self.height, self.width],
            data: self.bits.iter().map(|&b| b as f32).collect(),
        }
    }
}

/// Bilinear resampling of a single-channel map with half-pixel centers
/// (align-corners false). Source coordinates below zero clamp to the first
/// sample.
pub fn bilinear_resize(t: &Tensor, out_h: usize, out_w: usize) -> Result<Tensor> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::ZeroExtent);
    }
    let (in_h, in_w) = t.dims2()?;
    let rows = axis_taps(in_h, out_h);
    let cols = axis_taps(in_w, out_w);
    let src = t.data();
    let mut out = Vec::with_capacity(out_h * out_w);
    for &(r0, r1, fr) in &rows {
        for &(c0, c1, fc) in &cols {
            let v00 = src[r0 * in_w + c0] as f64;
            let v01 = src[r0 * in_w + c1] as f64;
            let v10 = src[r1 * in_w + c0] as f64;
            let v11 = src[r1 * in_w + c1] as f64;
            let top = v00 + (v01 - v00) * fc;
            let bottom = v10 + (v11 - v10) * fc;
            out.push((top + (bottom - top) * fr) as f32);
        }
    }
    Tensor::new(vec![out_h, out_w], out)
}

fn axis_taps(in_len: usize, out_len: usize) -> Vec<(usize, usize, f64)> {
    let scale = in_len as f64 / out_len as f64;
    (0..out_len)
        .map(|i| {
            let src = ((i as f64 + 0.5) * scale - 0.5).max(0.0);
            let i0 = (src.floor() as usize).min(in_len - 1);
            let i1 = (i0 + 1).min(in_len - 1);
            let frac = if i0 == i1 { 0.0 } else { src - i0 as f64 };
            (i0, i1, frac)
        })
        .collect()
}
