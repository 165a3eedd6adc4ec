use std::path::PathBuf;

use mambaad_core::ssm::suites::{equivalence_suite, gradcheck_suite, parallel_suite, SuiteReport};
use serde::Serialize;

use super::write_json;
use crate::exit::Status;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Longest sequence for the parallel suite; other suites cap it lower.
    #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_len: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random LTI instances for the recurrence/convolution check.
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    /// Random instances for the gradient check.
    #[arg(long, default_value_t = 100)]
    pub grad_instances: usize,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub seed: u64,
    pub max_len: usize,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

pub fn report(a: &Args) -> anyhow::Result<Report> {
    let max_len = a.max_len as usize;
    let (parallel, bits) = parallel_suite(max_len, a.seed.wrapping_add(1))?;
    let suites = vec![
        equivalence_suite(a.instances, max_len, a.seed),
        parallel,
        bits,
        gradcheck_suite(a.grad_instances, max_len, a.seed.wrapping_add(2)),
    ];
    Ok(Report {
        seed: a.seed,
        max_len,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

pub fn run(a: &Args) -> anyhow::Result<Status> {
    let r = report(a)?;
    super::emit(&(serde_json::to_string_pretty(&r)? + "\n"))?;
    if let Some(path) = &a.out {
        write_json(path, &r)?;
    }
    Ok(if r.passed { Status::Ok } else { Status::VerificationFailed })
}
