use std::path::PathBuf;

use recon::harness::channel::snr_to_ber;
use recon::protocol::choose_rate;
use recon::rate_adapt::initial_budget;
use recon::seed::{self, label};
use recon::PuncturePlan;

use crate::error::{CliError, Result};
use crate::matrices::table_from_files;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// alist files of one matrix set (all sharing n and m).
    #[arg(long = "matrix", required = true, num_args = 1..)]
    matrices: Vec<PathBuf>,
    /// Number of positions; derived from --e/--snr and --fd when absent.
    #[arg(long)]
    p0: Option<usize>,
    #[arg(long, conflicts_with = "snr")]
    e: Option<f64>,
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long, default_value_t = 1.1)]
    fd: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

pub fn run(a: Args) -> Result<()> {
    let table = table_from_files(&a.matrices, a.matrices.len())?;
    let set = table.into_iter().next().expect("at least one file");
    let p0 = match (a.p0, a.e.or(a.snr.map(snr_to_ber))) {
        (Some(p0), _) => p0,
        (None, Some(e)) => {
            choose_rate(e, a.fd, &[set.rate()])?;
            initial_budget(set.n_rows(), set.n_cols(), e, a.fd)?
        }
        (None, None) => return Err(CliError::Config("give --p0, --e or --snr".into())),
    };
    let mut rng = seed::rng(a.seed, &[label("plan")]);
    let plan = PuncturePlan::derive(&set, p0, &mut rng)?;
    crate::print_json(&plan)
}
