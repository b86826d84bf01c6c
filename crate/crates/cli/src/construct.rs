use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use recon::harness::cache::file_name;
use recon::ldpc::alist::to_alist;
use recon::MatrixSet;

use crate::error::{CliError, Result};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Code length.
    #[arg(long)]
    n: usize,
    /// Code rate; n * (1 - rate) must be a whole number of checks.
    #[arg(long)]
    rate: f64,
    /// Number of distinct matrices.
    #[arg(long = "N", default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct Manifest {
    version: &'static str,
    n: usize,
    m: usize,
    rate: f64,
    count: usize,
    seed: u64,
    files: Vec<Entry>,
}

#[derive(Serialize)]
struct Entry {
    file: String,
    sha256: String,
    edges: usize,
}

pub fn run(a: Args) -> Result<()> {
    if !(a.rate > 0.0 && a.rate < 1.0) {
        return Err(CliError::Config(format!("rate {} outside (0, 1)", a.rate)));
    }
    let set = MatrixSet::construct(a.n, a.rate, a.count, a.seed)?;
    std::fs::create_dir_all(&a.out).map_err(CliError::io(&a.out))?;
    let mut files = Vec::with_capacity(a.count);
    for (k, h) in set.matrices().iter().enumerate() {
        let name = file_name(a.n, a.rate, a.count, a.seed, k);
        let text = to_alist(h);
        let path = a.out.join(&name);
        std::fs::write(&path, &text).map_err(CliError::io(&path))?;
        files.push(Entry {
            file: name,
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
            edges: h.n_edges(),
        });
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        n: a.n,
        m: set.n_rows(),
        rate: a.rate,
        count: a.count,
        seed: a.seed,
        files,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
    let path = a.out.join("manifest.json");
    std::fs::write(&path, format!("{text}\n")).map_err(CliError::io(&path))?;
    log::info!("wrote {} matrices to {}", a.count, a.out.display());
    crate::print_json(&manifest)
}
