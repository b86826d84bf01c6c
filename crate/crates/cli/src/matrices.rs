//! Rate tables from alist files or built on demand.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use recon::harness::cache;
use recon::ldpc::alist::from_alist;
use recon::ldpc::{MatrixSet, ParityCheckMatrix};

use crate::error::{CliError, Result};

pub fn read_alist(path: &Path) -> Result<ParityCheckMatrix> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    from_alist(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Groups the files into one set per rate, `count` matrices each, ordered by
/// ascending rate. All files must share the code length.
pub fn table_from_files(paths: &[PathBuf], count: usize) -> Result<Vec<Arc<MatrixSet>>> {
    let mut by_m: BTreeMap<usize, Vec<ParityCheckMatrix>> = BTreeMap::new();
    let mut n = None;
    for path in paths {
        let h = read_alist(path)?;
        match n {
            None => n = Some(h.n_cols()),
            Some(n) if n != h.n_cols() => {
                return Err(CliError::Config(format!(
                    "{} has {} columns, earlier matrices have {n}",
                    path.display(),
                    h.n_cols()
                )))
            }
            _ => {}
        }
        by_m.entry(h.n_rows()).or_default().push(h);
    }
    // more checks means lower rate, so walk m from high to low
    by_m.into_iter()
        .rev()
        .map(|(m, mats)| {
            if mats.len() != count {
                return Err(CliError::Config(format!(
                    "{} matrices with {m} checks given, the scheme needs {count} per rate",
                    mats.len()
                )));
            }
            Ok(Arc::new(MatrixSet::new(mats, 0)?))
        })
        .collect()
}

/// Builds (or loads from `cache_dir`) one set per rate.
pub fn table_auto(
    n: usize,
    rates: &[f64],
    count: usize,
    seed: u64,
    cache_dir: Option<&Path>,
) -> Result<Vec<Arc<MatrixSet>>> {
    let mut rates = rates.to_vec();
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    rates
        .iter()
        .map(|&rate| {
            let set = match cache_dir {
                Some(dir) => cache::load_or_construct(dir, n, rate, count, seed)
                    .map_err(|e| CliError::Config(e.to_string()))?,
                None => MatrixSet::construct(n, rate, count, seed)?,
            };
            Ok(Arc::new(set))
        })
        .collect()
}
