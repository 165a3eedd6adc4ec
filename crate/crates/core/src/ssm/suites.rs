//! Seeded self-check suites for the scan kernels.

use serde::{Deserialize, Serialize};

use super::{
    build_conv_kernel, discretize, gradcheck, max_relative_error, scan_convolutional, scan_parallel,
    scan_recurrent, SsmParams,
};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub const EQUIVALENCE_TOLERANCE: f64 = 1e-5;
pub const PARALLEL_TOLERANCE: f64 = 1e-6;
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;
pub const REL_ERROR_FLOOR: f64 = 1e-6;
pub const EQUIVALENCE_MAX_LEN: usize = 256;
pub const EQUIVALENCE_MAX_STATE: usize = 8;
pub const GRADCHECK_MAX_LEN: usize = 16;
pub const GRADCHECK_MAX_STATE: usize = 4;
pub const POOL_SIZES: [usize; 3] = [1, 2, 8];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub instances: usize,
    pub tolerance: f64,
    pub max_error: f64,
    /// Description of the instance with the largest error.
    pub worst: String,
    pub passed: bool,
}

impl SuiteReport {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            instances: 0,
            tolerance,
            max_error: 0.0,
            worst: String::new(),
            passed: true,
        }
    }

    fn record(&mut self, error: f64, what: impl FnOnce() -> String) {
        self.instances += 1;
        // NaN counts as a failure and as the worst case.
        if error > self.max_error || error.is_nan() {
            self.max_error = error;
            self.worst = what();
        }
        self.passed &= error <= self.tolerance;
    }
}

/// Random stable LTI system with `n` modes.
pub fn random_lti(rng: &mut Rng, n: usize) -> SsmParams {
    let a = (0..n).map(|_| -rng.log_uniform(1e-2, 4.0).expect("range")).collect();
    let b = (0..n).map(|_| rng.uniform_f64(-1.0, 1.0)).collect();
    let c = (0..n).map(|_| rng.uniform_f64(-1.0, 1.0)).collect();
    let delta = rng.log_uniform(1e-3, 1.0).expect("range");
    SsmParams::new(a, b, c, delta).expect("valid parameters")
}

fn random_signal(rng: &mut Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.uniform_f64(-1.0, 1.0)).collect()
}

/// Recurrence versus global convolution on random LTI instances.
pub fn equivalence_suite(instances: usize, max_len: usize, seed: u64) -> SuiteReport {
    let mut rng = Rng::new(seed);
    let max_len = max_len.clamp(1, EQUIVALENCE_MAX_LEN);
    let mut report = SuiteReport::new("recurrence_vs_convolution", EQUIVALENCE_TOLERANCE);
    for i in 0..instances {
        let n = 1 + rng.below(EQUIVALENCE_MAX_STATE);
        let len = 1 + rng.below(max_len);
        let d = discretize(&random_lti(&mut rng, n));
        let x = random_signal(&mut rng, len);
        let y = scan_recurrent(&d, &x);
        let z = scan_convolutional(&build_conv_kernel(&d, len), &x).expect("lengths agree");
        report.record(max_relative_error(&y, &z, REL_ERROR_FLOOR), || {
            format!("instance {i}: N={n} L={len}")
        });
    }
    report
}

/// Lengths probed by the parallel suite: edge cases around powers of two.
pub fn parallel_lengths(max_len: usize) -> Vec<usize> {
    let mut out: Vec<usize> = [1, 2, 3, 5, 8, 17, 64, 100, 255, 256, 1000, 1024, 4095, 4096]
        .into_iter()
        .filter(|&l| l <= max_len)
        .collect();
    if max_len >= 1 && !out.contains(&max_len) {
        out.push(max_len);
    }
    out
}

/// Blelloch scan versus the sequential recurrence, and bit-identity of the
/// parallel result across pool sizes.
pub fn parallel_suite(max_len: usize, seed: u64) -> Result<(SuiteReport, SuiteReport)> {
    let pools = POOL_SIZES
        .iter()
        .map(|&n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool of {n}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = Rng::new(seed);
    let mut accuracy = SuiteReport::new("parallel_vs_sequential", PARALLEL_TOLERANCE);
    let mut identity = SuiteReport::new("parallel_bit_identity", 0.0);
    for len in parallel_lengths(max_len) {
        let n = 1 + rng.below(EQUIVALENCE_MAX_STATE);
        let d = discretize(&random_lti(&mut rng, n));
        let x = random_signal(&mut rng, len);
        let seq = scan_recurrent(&d, &x);
        let runs: Vec<Vec<f64>> = pools.iter().map(|p| p.install(|| scan_parallel(&d, &x))).collect();
        accuracy.record(max_relative_error(&seq, &runs[0], REL_ERROR_FLOOR), || {
            format!("N={n} L={len}")
        });
        let differing = runs[1..]
            .iter()
            .flat_map(|r| r.iter().zip(&runs[0]).filter(|(a, b)| a.to_bits() != b.to_bits()))
            .count();
        identity.record(differing as f64, || format!("N={n} L={len}: {differing} differing outputs"));
    }
    Ok((accuracy, identity))
}

/// Analytic selective-scan gradients versus central differences.
pub fn gradcheck_suite(instances: usize, max_len: usize, seed: u64) -> SuiteReport {
    let mut rng = Rng::new(seed);
    let max_len = max_len.clamp(1, GRADCHECK_MAX_LEN);
    let mut report = SuiteReport::new("selective_gradcheck", GRADCHECK_TOLERANCE);
    for _ in 0..instances {
        let len = 1 + rng.below(max_len);
        let state = 1 + rng.below(GRADCHECK_MAX_STATE);
        let g = gradcheck(len, state, rng.next_u64());
        report.record(g.max_rel_error, || {
            format!("L={} N={} seed={} at {}", g.len, g.state_size, g.seed, g.worst)
        });
    }
    report
}
