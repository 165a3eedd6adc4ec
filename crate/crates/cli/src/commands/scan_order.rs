use clap::ValueEnum;
use mambaad_core::scan::{schedule, ScanDirection, ScanMethod};

use crate::exit::Status;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// sweep, scan, zorder, zigzag or hilbert
    pub method: ScanMethod,
    /// forward, reverse, wh_forward, ..., wh_rot90_reverse
    pub direction: ScanDirection,
    pub height: usize,
    pub width: usize,
    #[arg(value_enum, default_value = "json")]
    pub format: Format,
}

pub fn render(a: &Args) -> anyhow::Result<String> {
    let s = schedule(a.method, a.direction, a.height, a.width)?;
    Ok(match a.format {
        Format::Json => serde_json::to_string(s.order())? + "\n",
        Format::Csv => {
            let mut out = String::from("step,row,col\n");
            for (t, (r, c)) in s.coords().enumerate() {
                out.push_str(&format!("{t},{r},{c}\n"));
            }
            out
        }
    })
}

pub fn run(a: &Args) -> anyhow::Result<Status> {
    super::emit(&render(a)?)?;
    Ok(Status::Ok)
}
