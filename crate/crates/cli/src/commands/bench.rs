use std::fs;
use std::hint::black_box;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::ValueEnum;
use mambaad_core::scan::{gather_sequence, scatter_sequence, schedule, ScanDirection, ScanMethod};
use mambaad_core::ssm::suites::random_lti;
use mambaad_core::ssm::{
    discretize, random_selective_inputs, scan_parallel, scan_recurrent, selective_scan,
};
use mambaad_core::{Rng, Tensor};

use crate::exit::Status;

pub const MIN_REPS: usize = 5;
const STATE_SIZE: usize = 8;
const GATHER_CHANNELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Sequential, parallel and selective scans.
    Scan,
    /// Gather plus scatter for every scan method.
    Gather,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum, default_value = "scan")]
    pub suite: Suite,
    /// Sequence lengths (scan) or pixel counts (gather).
    #[arg(long, value_delimiter = ',', default_value = "1024,16384,262144")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = MIN_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub struct Row {
    pub kernel: String,
    pub size: usize,
    pub ns_per_elem: f64,
}

fn median_ns_per_elem(reps: usize, elems: usize, mut f: impl FnMut()) -> f64 {
    let mut samples: Vec<f64> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_nanos() as f64 / elems as f64
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    // Floor at the printed resolution so a coarse timer never reports zero.
    samples[reps / 2].max(1e-3)
}

fn scan_rows(sizes: &[usize], reps: usize, seed: u64) -> Vec<Row> {
    let mut rng = Rng::new(seed);
    let mut rows = Vec::new();
    for &len in sizes {
        let d = discretize(&random_lti(&mut rng, STATE_SIZE));
        let x: Vec<f64> = (0..len).map(|_| rng.uniform_f64(-1.0, 1.0)).collect();
        let sel = random_selective_inputs(len, STATE_SIZE, &mut rng);
        let timings = [
            ("scan_sequential", median_ns_per_elem(reps, len, || {
                black_box(scan_recurrent(black_box(&d), black_box(&x)));
            })),
            ("scan_parallel", median_ns_per_elem(reps, len, || {
                black_box(scan_parallel(black_box(&d), black_box(&x)));
            })),
            ("scan_selective", median_ns_per_elem(reps, len, || {
                black_box(selective_scan(black_box(&sel)));
            })),
        ];
        rows.extend(timings.into_iter().map(|(k, t)| Row {
            kernel: k.to_string(),
            size: len,
            ns_per_elem: t,
        }));
    }
    rows
}

/// Square power-of-two side with at most `pixels` cells, so every method applies.
fn square_side(pixels: usize) -> usize {
    let bits = usize::BITS - 1 - pixels.max(1).leading_zeros();
    1 << (bits / 2)
}

fn gather_rows(sizes: &[usize], reps: usize, seed: u64) -> anyhow::Result<Vec<Row>> {
    let mut rng = Rng::new(seed);
    let mut rows = Vec::new();
    for &pixels in sizes {
        let side = square_side(pixels);
        let n = side * side;
        let t = Tensor::new(
            vec![GATHER_CHANNELS, side, side],
            rng.uniform(GATHER_CHANNELS * n, -1.0, 1.0)?,
        )?;
        for method in ScanMethod::ALL {
            let s = schedule(method, ScanDirection::Forward, side, side)?;
            let mut err = None;
            let ns = median_ns_per_elem(reps, n * GATHER_CHANNELS, || {
                match gather_sequence(&t, &s).and_then(|q| scatter_sequence(&q, &s)) {
                    Ok(out) => {
                        black_box(out);
                    }
                    Err(e) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e.into());
            }
            rows.push(Row {
                kernel: format!("gather_scatter_{}", method.name()),
                size: n,
                ns_per_elem: ns,
            });
        }
    }
    Ok(rows)
}

pub fn rows(a: &Args) -> anyhow::Result<Vec<Row>> {
    if a.reps < MIN_REPS {
        bail!("--reps must be at least {MIN_REPS}, got {}", a.reps);
    }
    if a.sizes.is_empty() || a.sizes.contains(&0) {
        bail!("--sizes must list positive sizes");
    }
    match a.suite {
        Suite::Scan => Ok(scan_rows(&a.sizes, a.reps, a.seed)),
        Suite::Gather => gather_rows(&a.sizes, a.reps, a.seed),
    }
}

pub fn run(a: &Args) -> anyhow::Result<Status> {
    let mut csv = String::from("kernel,size,median_ns_per_elem\n");
    for r in rows(a)? {
        csv.push_str(&format!("{},{},{:.3}\n", r.kernel, r.size, r.ns_per_elem));
    }
    match &a.out {
        Some(p) => fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
        None => super::emit(&csv)?,
    }
    Ok(Status::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_sides() {
        assert_eq!(square_side(1024), 32);
        assert_eq!(square_side(2048), 32);
        assert_eq!(square_side(262144), 512);
        assert_eq!(square_side(3), 1);
    }
}
