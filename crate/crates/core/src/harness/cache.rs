//! On-disk alist cache for constructed matrix sets.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::ldpc::alist::{from_alist, to_alist};
use crate::ldpc::{self, MatrixSet};

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ldpc::alist::ParseError },
    #[error(transparent)]
    Ldpc(#[from] ldpc::Error),
}

/// File name of member `k` of the set keyed by `(n, rate, count, seed)`.
pub fn file_name(n: usize, rate: f64, count: usize, seed: u64, k: usize) -> String {
    format!("peg_n{n}_r{rate}_N{count}_s{seed:016x}_{k}.alist")
}

/// Loads the set from `dir` if every member is present, otherwise constructs
/// it and writes the missing files.
pub fn load_or_construct(dir: &Path, n: usize, rate: f64, count: usize, seed: u64) -> Result<MatrixSet, CacheError> {
    let paths: Vec<PathBuf> = (0..count).map(|k| dir.join(file_name(n, rate, count, seed, k))).collect();
    if paths.iter().all(|p| p.is_file()) {
        let mut matrices = Vec::with_capacity(count);
        for path in &paths {
            let text = fs::read_to_string(path).map_err(|source| CacheError::Io {
                path: path.clone(),
                source,
            })?;
            let h = from_alist(&text).map_err(|source| CacheError::Parse {
                path: path.clone(),
                source,
            })?;
            matrices.push(h);
        }
        let set = MatrixSet::new(matrices, seed)?;
        if set.n_cols() == n && set.n_rows() == ldpc::check_count(n, rate)? {
            log::debug!("loaded {count} cached {}x{n} matrices from {}", set.n_rows(), dir.display());
            return Ok(set);
        }
        log::warn!("cached matrices in {} do not match n={n} rate={rate}; rebuilding", dir.display());
    }
    let set = MatrixSet::construct(n, rate, count, seed)?;
    fs::create_dir_all(dir).map_err(|source| CacheError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for (h, path) in set.matrices().iter().zip(&paths) {
        fs::write(path, to_alist(h)).map_err(|source| CacheError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(set)
}
