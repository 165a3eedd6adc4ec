//! Forward passes of the decoder building blocks.

pub mod conv;
pub mod hss;
pub mod layers;
pub mod lss;

pub use conv::{avg_pool2, conv_block, dwconv2d, upsample_nearest2, ConvBParams, Conv2d, DwConv};
pub use hss::{hss_forward, scan_directions, HssConfig, HssParams, SsmBank};
pub use layers::{silu, Linear, Norm, NORM_EPS};
pub use lss::{init_block_params, lss_forward, LocalBranch, LssConfig, LssParams};
