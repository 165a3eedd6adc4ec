//! Kernels and building blocks for a state-space-model anomaly detector:
//! hybrid scan schedules, selective scan kernels, LSS/HSS blocks, multi-scale
//! anomaly maps and the seven-metric evaluation protocol.

pub mod blocks;
pub mod error;
pub mod io;
pub mod metrics;
pub mod params;
pub mod pipeline;
pub mod rng;
pub mod scan;
pub mod ssm;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use rng::Rng;
pub use tensor::{bilinear_resize, BinaryMask, Tensor};
