//! Selective (time-varying) scan and its reverse-mode gradient.
//!
//! Each step is discretized with its own `delta_t` and `B_t`:
//!
//! ```text
//! h_t = exp(delta_t * a) * h_{t-1} + zoh(delta_t, a) * B_t * x_t
//! y_t = <C_t, h_t>
//! ```

use super::{zoh_factor, ZOH_SERIES_THRESHOLD};
use crate::error::{Error, Result};

/// Inputs of one scalar-channel selective scan. `b` and `c` are `len x state`
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectiveInputs {
    pub a: Vec<f64>,
    pub x: Vec<f64>,
    pub delta: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// Gradients of a scalar loss with respect to every field of
/// [`SelectiveInputs`], same layouts.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGradients {
    pub d_x: Vec<f64>,
    pub d_delta: Vec<f64>,
    pub d_b: Vec<f64>,
    pub d_c: Vec<f64>,
    pub d_a: Vec<f64>,
}

impl SelectiveInputs {
    pub fn new(a: Vec<f64>, x: Vec<f64>, delta: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let s = Self { a, x, delta, b, c };
        s.validate()?;
        Ok(s)
    }

    /// Time-constant inputs equivalent to an LTI system.
    pub fn constant(a: &[f64], b: &[f64], c: &[f64], delta: f64, x: Vec<f64>) -> Result<Self> {
        let len = x.len();
        Self::new(
            a.to_vec(),
            x,
            vec![delta; len],
            b.repeat(len),
            c.repeat(len),
        )
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn state_size(&self) -> usize {
        self.a.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (l, n) = (self.len(), self.state_size());
        if n == 0 {
            return Err(Error::InvalidParameter("state size must be >= 1".into()));
        }
        if self.delta.len() != l || self.b.len() != l * n || self.c.len() != l * n {
            return Err(Error::ShapeMismatch(format!(
                "selective inputs: len {l}, state {n}, delta {}, b {}, c {}",
                self.delta.len(),
                self.b.len(),
                self.c.len()
            )));
        }
        if self.delta.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidParameter("delta_t must be positive and finite".into()));
        }
        let all = self.a.iter().chain(&self.x).chain(&self.b).chain(&self.c);
        if !all.into_iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite selective input".into()));
        }
        Ok(())
    }
}

pub fn selective_scan(s: &SelectiveInputs) -> Vec<f64> {
    let n = s.state_size();
    let mut h = vec![0.0f64; n];
    (0..s.len())
        .map(|t| {
            let (dt, xt) = (s.delta[t], s.x[t]);
            let row = t * n;
            let mut y = 0.0;
            for i in 0..n {
                let a_bar = (dt * s.a[i]).exp();
                h[i] = a_bar * h[i] + zoh_factor(dt, s.a[i]) * s.b[row + i] * xt;
                y += s.c[row + i] * h[i];
            }
            y
        })
        .collect()
}

/// `(phi, d phi / d delta, d phi / d a)` for `phi = zoh_factor(delta, a)`,
/// differentiating whichever branch the forward pass evaluates.
fn zoh_partials(delta: f64, a: f64) -> (f64, f64, f64) {
    let z = delta * a;
    let phi = zoh_factor(delta, a);
    if z.abs() < ZOH_SERIES_THRESHOLD {
        (phi, 1.0 + z + z * z / 2.0, delta * delta * (0.5 + z / 3.0))
    } else {
        let ez = z.exp();
        (phi, ez, (z * ez - z.exp_m1()) / (a * a))
    }
}

/// Reverse-mode gradients of `sum_t dy_t * y_t`.
pub fn selective_scan_backward(s: &SelectiveInputs, dy: &[f64]) -> Result<ScanGradients> {
    let (l, n) = (s.len(), s.state_size());
    if dy.len() != l {
        return Err(Error::ShapeMismatch(format!(
            "dy has length {}, expected {l}",
            dy.len()
        )));
    }

    // Forward pass, keeping every state.
    let mut alpha = vec![0.0f64; l * n];
    let mut phi = vec![0.0f64; l * n];
    let mut phi_dt = vec![0.0f64; l * n];
    let mut phi_da = vec![0.0f64; l * n];
    let mut h = vec![0.0f64; l * n];
    for t in 0..l {
        for i in 0..n {
            let k = t * n + i;
            alpha[k] = (s.delta[t] * s.a[i]).exp();
            (phi[k], phi_dt[k], phi_da[k]) = zoh_partials(s.delta[t], s.a[i]);
            let prev = if t > 0 { h[k - n] } else { 0.0 };
            h[k] = alpha[k] * prev + phi[k] * s.b[k] * s.x[t];
        }
    }

    let mut g = ScanGradients {
        d_x: vec![0.0; l],
        d_delta: vec![0.0; l],
        d_b: vec![0.0; l * n],
        d_c: vec![0.0; l * n],
        d_a: vec![0.0; n],
    };
    // carry[i] = dL/dh_t[i] contributed by steps after t.
    let mut carry = vec![0.0f64; n];
    for t in (0..l).rev() {
        let xt = s.x[t];
        for i in 0..n {
            let k = t * n + i;
            let dh = dy[t] * s.c[k] + carry[i];
            let prev = if t > 0 { h[k - n] } else { 0.0 };

            g.d_c[k] = dy[t] * h[k];
            g.d_x[t] += dh * phi[k] * s.b[k];
            g.d_b[k] = dh * phi[k] * xt;

            let d_alpha = dh * prev;
            let d_phi = dh * s.b[k] * xt;
            g.d_delta[t] += d_alpha * s.a[i] * alpha[k] + d_phi * phi_dt[k];
            g.d_a[i] += d_alpha * s.delta[t] * alpha[k] + d_phi * phi_da[k];

            carry[i] = alpha[k] * dh;
        }
    }
    Ok(g)
}
