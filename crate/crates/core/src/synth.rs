//! Synthetic feature pyramids with planted anomalies.

use crate::error::{Error, Result};
use crate::pipeline::{FeaturePyramid, SCALES};
use crate::rng::Rng;
use crate::tensor::{BinaryMask, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anomaly {
    Square,
    Blob,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSample {
    pub pyramid: FeaturePyramid,
    pub mask: BinaryMask,
    pub anomaly: Option<Anomaly>,
}

impl SynthSample {
    pub fn is_anomalous(&self) -> bool {
        self.anomaly.is_some()
    }
}

fn plant(rng: &mut Rng, size: usize, kind: Anomaly) -> Result<BinaryMask> {
    let mut m = BinaryMask::zeros(size, size)?;
    let span = (size / 4).max(2);
    match kind {
        Anomaly::Square => {
            let side = 2 + rng.below(span - 1);
            let (r0, c0) = (rng.below(size - side + 1), rng.below(size - side + 1));
            for r in r0..r0 + side {
                for c in c0..c0 + side {
                    m.set(r, c, true);
                }
            }
        }
        Anomaly::Blob => {
            let radius = 1.0 + rng.uniform_f64(0.0, span as f64 / 2.0);
            let margin = radius.ceil() as usize;
            let lo = margin.min(size / 2);
            let hi = size.saturating_sub(margin).max(lo + 1);
            let (cy, cx) = ((lo + rng.below(hi - lo)) as f64, (lo + rng.below(hi - lo)) as f64);
            for r in 0..size {
                for c in 0..size {
                    let (dy, dx) = (r as f64 - cy, c as f64 - cx);
                    if dy * dy + dx * dx <= radius * radius {
                        m.set(r, c, true);
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Smooth random field per channel: a few random plane waves plus noise.
fn base_scale(rng: &mut Rng, channels: usize, side: usize) -> Tensor {
    let mut data = Vec::with_capacity(channels * side * side);
    for _ in 0..channels {
        let waves: Vec<[f64; 4]> = (0..3)
            .map(|_| {
                [
                    rng.uniform_f64(-1.0, 1.0),
                    rng.uniform_f64(0.0, 0.8),
                    rng.uniform_f64(0.0, 0.8),
                    rng.uniform_f64(0.0, std::f64::consts::TAU),
                ]
            })
            .collect();
        let bias = rng.uniform_f64(-0.5, 0.5);
        for r in 0..side {
            for c in 0..side {
                let v: f64 = waves
                    .iter()
                    .map(|[amp, fy, fx, ph]| amp * (fy * r as f64 + fx * c as f64 + ph).sin())
                    .sum();
                data.push((bias + v + rng.uniform_f64(-0.05, 0.05)) as f32);
            }
        }
    }
    Tensor::new(vec![channels, side, side], data).expect("consistent shape")
}

/// Sample `index` of a deterministic fixture set. Even indices are normal;
/// odd ones carry a planted square or blob whose features are shifted.
pub fn fixture_sample(seed: u64, index: usize, size: usize, channels: [usize; SCALES]) -> Result<SynthSample> {
    if !size.is_power_of_two() || size < 8 {
        return Err(Error::InvalidConfig(format!(
            "fixture size must be a power of two >= 8, got {size}"
        )));
    }
    if channels.contains(&0) {
        return Err(Error::InvalidConfig("channel counts must be positive".into()));
    }
    let mut rng = Rng::new(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let anomaly = (index % 2 == 1).then(|| if rng.below(2) == 0 { Anomaly::Square } else { Anomaly::Blob });
    let mask = match anomaly {
        Some(kind) => plant(&mut rng, size, kind)?,
        None => BinaryMask::zeros(size, size)?,
    };
    let mut scales = [0, 1, 2].map(|s| base_scale(&mut rng, channels[s], size >> s));
    if anomaly.is_some() {
        for (s, t) in scales.iter_mut().enumerate() {
            let side = size >> s;
            let shift: Vec<f32> = rng.uniform(channels[s], -2.0, 2.0)?;
            let hw = side * side;
            for r in 0..side {
                for c in 0..side {
                    let f = 1 << s;
                    let hit = (0..f).any(|dy| (0..f).any(|dx| mask.get(r * f + dy, c * f + dx)));
                    if hit {
                        for (ch, &d) in shift.iter().enumerate() {
                            t.data_mut()[ch * hw + r * side + c] += d;
                        }
                    }
                }
            }
        }
    }
    Ok(SynthSample {
        pyramid: FeaturePyramid::new(scales)?,
        mask,
        anomaly,
    })
}
