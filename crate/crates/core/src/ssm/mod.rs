//! Diagonal state-space model kernels.
//!
//! Continuous system `h' = A h + B x`, `y = C h` with diagonal `A`,
//! discretized by zero-order hold with timescale `delta`:
//!
//! ```text
//! a_bar = exp(delta * a)
//! b_bar = (exp(delta * a) - 1) / a * b
//! h_t   = a_bar * h_{t-1} + b_bar * x_t,   y_t = <c, h_t>
//! ```
//!
//! Kernels work on `f64` slices; all accumulation is 64-bit.

mod gradcheck;
mod parallel;
mod selective;
pub mod suites;

pub use gradcheck::{gradcheck, random_selective_inputs, GradcheckReport};
pub use parallel::scan_parallel;
pub use selective::{selective_scan, selective_scan_backward, ScanGradients, SelectiveInputs};

use crate::error::{Error, Result};

/// Below this `|delta * a|` the ZOH input factor uses its Taylor series.
pub const ZOH_SERIES_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SsmParams {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub delta: f64,
}

impl SsmParams {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, delta: f64) -> Result<Self> {
        let p = Self { a, b, c, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn state_size(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.a.len();
        if n == 0 {
            return Err(Error::InvalidParameter("state size must be >= 1".into()));
        }
        if self.b.len() != n || self.c.len() != n {
            return Err(Error::InvalidParameter(format!(
                "a, b, c lengths differ: {}, {}, {}",
                n,
                self.b.len(),
                self.c.len()
            )));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive and finite, got {}",
                self.delta
            )));
        }
        if !self.a.iter().chain(&self.b).chain(&self.c).all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite SSM parameter".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsmDiscrete {
    pub a_bar: Vec<f64>,
    pub b_bar: Vec<f64>,
    pub c: Vec<f64>,
}

impl SsmDiscrete {
    pub fn state_size(&self) -> usize {
        self.a_bar.len()
    }
}

/// `(exp(delta * a) - 1) / a`, continuous through `a = 0` where it equals `delta`.
pub fn zoh_factor(delta: f64, a: f64) -> f64 {
    let z = delta * a;
    if z.abs() < ZOH_SERIES_THRESHOLD {
        delta * (1.0 + z / 2.0 + z * z / 6.0)
    } else {
        z.exp_m1() / a
    }
}

pub fn discretize(p: &SsmParams) -> SsmDiscrete {
    SsmDiscrete {
        a_bar: p.a.iter().map(|&a| (p.delta * a).exp()).collect(),
        b_bar: p
            .a
            .iter()
            .zip(&p.b)
            .map(|(&a, &b)| zoh_factor(p.delta, a) * b)
            .collect(),
        c: p.c.clone(),
    }
}

/// Sequential recurrence from a zero initial state.
pub fn scan_recurrent(d: &SsmDiscrete, x: &[f64]) -> Vec<f64> {
    let mut h = vec![0.0f64; d.state_size()];
    x.iter()
        .map(|&xt| {
            let mut y = 0.0;
            for i in 0..h.len() {
                h[i] = d.a_bar[i] * h[i] + d.b_bar[i] * xt;
                y += d.c[i] * h[i];
            }
            y
        })
        .collect()
}

/// `K[k] = sum_i c_i * a_bar_i^k * b_bar_i` for `k < len`.
pub fn build_conv_kernel(d: &SsmDiscrete, len: usize) -> Vec<f64> {
    let mut k = vec![0.0f64; len];
    for i in 0..d.state_size() {
        let mut power = d.c[i] * d.b_bar[i];
        for kk in k.iter_mut() {
            *kk += power;
            power *= d.a_bar[i];
        }
    }
    k
}

/// Causal convolution `y_t = sum_{j <= t} K[j] * x_{t-j}`.
pub fn scan_convolutional(kernel: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if kernel.len() != x.len() {
        return Err(Error::ShapeMismatch(format!(
            "kernel length {} differs from input length {}",
            kernel.len(),
            x.len()
        )));
    }
    Ok((0..x.len())
        .map(|t| (0..=t).map(|j| kernel[j] * x[t - j]).sum())
        .collect())
}

/// Relative error `|a - b| / max(|a|, |b|)` maximized over elements, with a
/// floor on the denominator so exact zeros compare as absolute error.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}
