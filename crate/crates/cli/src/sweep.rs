use std::io::Write as _;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use recon::harness::sweep::{run_sweep, PointSummary, SweepConfig};
use recon::Scheme;

use crate::error::{CliError, Result};

/// Flags override the matching keys of the config file.
#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSON sweep config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long = "scheme", value_delimiter = ',')]
    schemes: Vec<Scheme>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long = "rate", value_delimiter = ',')]
    rates: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    fd: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    delta: Vec<f64>,
    #[arg(long)]
    ul: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long = "N")]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for trials.csv, points.csv and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress progress output.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Serialize)]
struct Report<'a> {
    version: &'static str,
    digest: String,
    records: usize,
    config: &'a SweepConfig,
    points: &'a [PointSummary],
}

fn apply<T: Clone>(dst: &mut Vec<T>, src: &[T]) {
    if !src.is_empty() {
        *dst = src.to_vec();
    }
}

pub fn run(a: Args) -> Result<()> {
    let text = std::fs::read_to_string(&a.config).map_err(CliError::io(&a.config))?;
    let mut cfg: SweepConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", a.config.display())))?;
    apply(&mut cfg.schemes, &a.schemes);
    apply(&mut cfg.n, &a.n);
    apply(&mut cfg.rates, &a.rates);
    apply(&mut cfg.snr, &a.snr);
    apply(&mut cfg.fd, &a.fd);
    apply(&mut cfg.delta, &a.delta);
    cfg.ul = a.ul.unwrap_or(cfg.ul);
    cfg.trials = a.trials.unwrap_or(cfg.trials);
    cfg.n_matrices = a.count.unwrap_or(cfg.n_matrices);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.workers = a.workers.unwrap_or(cfg.workers);
    cfg.validate()?;

    let start = Instant::now();
    let last = Mutex::new(Instant::now());
    let progress = |done: usize, total: usize| {
        let mut last = last.lock().unwrap();
        if done == total || last.elapsed().as_millis() >= 500 {
            *last = Instant::now();
            let mut err = std::io::stderr().lock();
            let _ = write!(err, "\rtrials {done}/{total}  {:.1}s", start.elapsed().as_secs_f64());
            if done == total {
                let _ = writeln!(err);
            }
        }
    };
    let out = run_sweep(&cfg, if a.quiet { None } else { Some(&progress) })?;
    if let Some(dir) = &a.out {
        out.write(dir)?;
        log::info!("wrote sweep outputs to {}", dir.display());
    }
    crate::print_json(&Report {
        version: out.version,
        digest: out.digest(),
        records: out.records.len(),
        config: &out.config,
        points: &out.points,
    })
}
