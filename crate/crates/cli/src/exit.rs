//! Process exit codes.

use mambaad_core::Error;

pub const OK: u8 = 0;
pub const VERIFICATION_FAILED: u8 = 1;
pub const USAGE: u8 = 2;
pub const METRIC_PRECONDITION: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    VerificationFailed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => OK,
            Status::VerificationFailed => VERIFICATION_FAILED,
        }
    }
}

/// Metric preconditions anywhere in the chain map to their own code; every
/// other error is a usage or I/O problem.
pub fn classify(e: &anyhow::Error) -> u8 {
    let metric = e
        .chain()
        .any(|c| matches!(c.downcast_ref::<Error>(), Some(Error::MetricPrecondition(_))));
    if metric {
        METRIC_PRECONDITION
    } else {
        USAGE
    }
}
