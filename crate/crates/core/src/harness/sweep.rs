//! Monte Carlo sweeps over (code length, target efficiency, delta, SNR,
//! scheme) grids.
//!
//! Every trial draws its key pair and session seeds from the master seed and
//! the trial's `(n, snr, trial)` coordinates only, so all schemes and deltas
//! at a grid point reconcile exactly the same keys. Records come back ordered
//! by `(point, trial)` whatever the worker count.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::cache::{self, CacheError};
use super::channel::{gen_key_pair, snr_to_ber};
use super::metrics::{binary_entropy, throughput};
use crate::ldpc::{self, MatrixSet};
use crate::protocol::{self, choose_rate, run_local, Alice, Bob, Role, Scheme, SessionConfig};
use crate::seed::{self, label};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error("sweep config: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Ldpc(#[from] ldpc::Error),
    #[error("trial {trial} at point {point}: {source}")]
    Session {
        point: usize,
        trial: usize,
        source: protocol::Error,
    },
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

fn default_fd() -> Vec<f64> {
    vec![1.1]
}
fn default_delta() -> Vec<f64> {
    vec![0.02]
}
fn default_ul() -> usize {
    100
}
fn default_n_matrices() -> usize {
    3
}
fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schemes: Vec<Scheme>,
    /// Code lengths.
    pub n: Vec<usize>,
    /// Rate table shared by every code length, ascending.
    pub rates: Vec<f64>,
    /// SNR grid in dB.
    pub snr: Vec<f64>,
    #[serde(default = "default_fd")]
    pub fd: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: Vec<f64>,
    pub trials: usize,
    /// Decoder iteration cap per round.
    #[serde(default = "default_ul")]
    pub ul: usize,
    /// Matrices per rate for MR and MRCR. SR and SRCR use the first member.
    #[serde(default = "default_n_matrices")]
    pub n_matrices: usize,
    pub seed: u64,
    /// Seed for matrix construction; defaults to one derived from `seed`.
    #[serde(default)]
    pub matrix_seed: Option<u64>,
    /// Worker threads; 0 means one per available core.
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Directory for cached alist files.
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.snr.is_empty() || self.snr.iter().any(|s| !s.is_finite()) {
            return bad("snr grid must be nonempty and finite");
        }
        if self.schemes.is_empty() || self.n.is_empty() || self.fd.is_empty() || self.delta.is_empty() {
            return bad("schemes, n, fd and delta must be nonempty");
        }
        if self.rates.is_empty() || self.rates.windows(2).any(|w| w[0] >= w[1]) {
            return bad("rates must be nonempty and strictly ascending");
        }
        if self.ul == 0 {
            return bad("ul must be at least 1");
        }
        if self.n_matrices < 2 && self.schemes.iter().any(|s| s.is_multi_matrix()) {
            return bad("multi-matrix schemes need n_matrices >= 2");
        }
        if self.delta.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
            return bad("delta values must lie in (0, 1)");
        }
        if self.fd.iter().any(|&f| !(f > 1.0 && f.is_finite())) {
            return bad("fd values must exceed 1");
        }
        Ok(())
    }

    pub fn matrix_seed(&self) -> u64 {
        self.matrix_seed.unwrap_or_else(|| seed::derive(self.seed, &[label("matrices")]))
    }

    fn workers(&self) -> usize {
        match self.workers {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            w => w,
        }
    }

    /// Grid points in output order.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &fd in &self.fd {
                for &delta in &self.delta {
                    for (snr_index, &snr) in self.snr.iter().enumerate() {
                        for &scheme in &self.schemes {
                            out.push(Point {
                                scheme,
                                n,
                                fd,
                                delta,
                                snr,
                                snr_index,
                                e: snr_to_ber(snr),
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub scheme: Scheme,
    pub n: usize,
    pub fd: f64,
    pub delta: f64,
    pub snr: f64,
    #[serde(skip)]
    snr_index: usize,
    pub e: f64,
}

/// Outcome of one trial. `f` is present iff `success`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub point: usize,
    pub trial: usize,
    pub scheme: Scheme,
    pub n: usize,
    pub rate: Option<f64>,
    pub snr: f64,
    pub e: f64,
    pub fd: f64,
    pub delta: f64,
    pub success: bool,
    /// Alice's and Bob's final keys agree (both empty on failure).
    pub keys_match: bool,
    pub rounds: usize,
    pub iterations: usize,
    pub p0: usize,
    pub s_final: usize,
    pub f: Option<f64>,
    pub disclosed_bits: usize,
    pub flips: usize,
    pub wall_s: f64,
}

/// Per-point aggregate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub point: usize,
    pub scheme: Scheme,
    pub n: usize,
    pub rate: Option<f64>,
    pub snr: f64,
    pub e: f64,
    pub fd: f64,
    pub delta: f64,
    pub trials: usize,
    pub successes: usize,
    pub fer: f64,
    pub mean_f: Option<f64>,
    /// `(1 - R0) / h(e)`: the single-round, unpunctured efficiency.
    pub sr_f: Option<f64>,
    pub mean_rounds: f64,
    pub mean_iterations: f64,
    pub p0: usize,
    pub undetected: usize,
    pub busy_s: f64,
    /// Busy time divided by the worker count.
    pub t_s: f64,
    pub throughput: f64,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutput {
    pub config: SweepConfig,
    pub version: &'static str,
    pub workers: usize,
    pub records: Vec<TrialRecord>,
    pub points: Vec<PointSummary>,
}

const TRIAL_HEADER: [&str; 19] = [
    "point", "trial", "scheme", "n", "rate", "snr", "e", "fd", "delta", "success", "keys_match", "rounds",
    "iterations", "p0", "s_final", "f", "disclosed_bits", "flips", "wall_s",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl TrialRecord {
    fn fields(&self) -> Vec<String> {
        vec![
            self.point.to_string(),
            self.trial.to_string(),
            self.scheme.to_string(),
            self.n.to_string(),
            opt(self.rate),
            self.snr.to_string(),
            self.e.to_string(),
            self.fd.to_string(),
            self.delta.to_string(),
            self.success.to_string(),
            self.keys_match.to_string(),
            self.rounds.to_string(),
            self.iterations.to_string(),
            self.p0.to_string(),
            self.s_final.to_string(),
            opt(self.f),
            self.disclosed_bits.to_string(),
            self.flips.to_string(),
            self.wall_s.to_string(),
        ]
    }
}

impl SweepOutput {
    /// Per-trial CSV. Without `wall`, the timing column is dropped and the
    /// result depends only on the config.
    pub fn trials_csv(&self, wall: bool) -> String {
        let keep = if wall { TRIAL_HEADER.len() } else { TRIAL_HEADER.len() - 1 };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&TRIAL_HEADER[..keep]).expect("in-memory csv");
        for r in &self.records {
            w.write_record(&r.fields()[..keep]).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    pub fn points_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for p in &self.points {
            w.serialize(p).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    /// SHA-256 of the wall-time-free trial CSV, hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.trials_csv(false).as_bytes()))
    }

    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            version: &'a str,
            seed: u64,
            matrix_seed: u64,
            workers: usize,
            digest: String,
            timing: &'a str,
            config: &'a SweepConfig,
            points: &'a [PointSummary],
        }
        serde_json::to_string_pretty(&Summary {
            version: self.version,
            seed: self.config.seed,
            matrix_seed: self.config.matrix_seed(),
            workers: self.workers,
            digest: self.digest(),
            timing: "t_s = summed per-trial session wall time / workers; matrix construction excluded",
            config: &self.config,
            points: &self.points,
        })
        .expect("summary serializes")
    }

    /// Writes `trials.csv`, `points.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |path: PathBuf| move |source| Error::Io { path, source };
        std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        for (name, body) in [
            ("trials.csv", self.trials_csv(true)),
            ("points.csv", self.points_csv()),
            ("summary.json", self.summary_json()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io(path.clone()))?;
        }
        Ok(())
    }
}

/// Folds a record stream into per-point aggregates. `records` must be the
/// records of `points`, in order; `skipped` maps point index to reason.
pub fn aggregate(
    points: &[Point],
    records: &[TrialRecord],
    skipped: &BTreeMap<usize, String>,
    workers: usize,
) -> Vec<PointSummary> {
    let mut by_point: BTreeMap<usize, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        by_point.entry(r.point).or_default().push(r);
    }
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let rs = by_point.get(&i).map(Vec::as_slice).unwrap_or(&[]);
            let trials = rs.len();
            let successes = rs.iter().filter(|r| r.success).count();
            let fs: Vec<f64> = rs.iter().filter_map(|r| r.f).collect();
            let busy_s = rs.iter().fold(0.0, |acc, r| acc + r.wall_s);
            let t_s = busy_s / workers as f64;
            let p0 = rs.first().map_or(0, |r| r.p0);
            let rate = rs.first().and_then(|r| r.rate);
            let mean = |xs: &mut dyn Iterator<Item = f64>| {
                if trials == 0 {
                    0.0
                } else {
                    xs.sum::<f64>() / trials as f64
                }
            };
            PointSummary {
                point: i,
                scheme: p.scheme,
                n: p.n,
                rate,
                snr: p.snr,
                e: p.e,
                fd: p.fd,
                delta: p.delta,
                trials,
                successes,
                fer: if trials == 0 { 0.0 } else { (trials - successes) as f64 / trials as f64 },
                mean_f: (!fs.is_empty()).then(|| fs.iter().sum::<f64>() / fs.len() as f64),
                sr_f: rate.map(|r| (1.0 - r) / binary_entropy(p.e)),
                mean_rounds: mean(&mut rs.iter().map(|r| r.rounds as f64)),
                mean_iterations: mean(&mut rs.iter().map(|r| r.iterations as f64)),
                p0,
                undetected: rs.iter().filter(|r| r.success && !r.keys_match).count(),
                busy_s,
                t_s,
                throughput: if t_s > 0.0 { throughput(successes, p.n, p0, t_s) } else { 0.0 },
                skipped: skipped.get(&i).cloned(),
            }
        })
        .collect()
}

/// Matrix sets per code length, by ascending rate.
fn build_tables(cfg: &SweepConfig) -> Result<BTreeMap<usize, Vec<Arc<MatrixSet>>>> {
    let mseed = cfg.matrix_seed();
    let count = if cfg.schemes.iter().any(|s| s.is_multi_matrix()) { cfg.n_matrices } else { 1 };
    let mut out = BTreeMap::new();
    for &n in &cfg.n {
        let mut sets = Vec::with_capacity(cfg.rates.len());
        for &rate in &cfg.rates {
            let s = seed::derive(mseed, &[n as u64, rate.to_bits()]);
            let set = match &cfg.cache_dir {
                Some(dir) => cache::load_or_construct(dir, n, rate, count, s)?,
                None => MatrixSet::construct(n, rate, count, s)?,
            };
            log::info!("built {count} matrices n={n} rate={rate}");
            sets.push(Arc::new(set));
        }
        out.insert(n, sets);
    }
    Ok(out)
}

/// Runs every trial of every admissible grid point. `progress` is called with
/// (finished, total) trial counts as trials complete.
pub fn run_sweep(cfg: &SweepConfig, progress: Option<&(dyn Fn(usize, usize) + Sync)>) -> Result<SweepOutput> {
    cfg.validate()?;
    let tables = build_tables(cfg)?;
    let singles: BTreeMap<usize, Vec<Arc<MatrixSet>>> = tables
        .iter()
        .map(|(&n, sets)| (n, sets.iter().map(|s| Arc::new(s.single(0))).collect()))
        .collect();
    let points = cfg.points();
    let mut skipped = BTreeMap::new();
    let mut jobs = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let rates: Vec<f64> = tables[&p.n].iter().map(|s| s.rate()).collect();
        match choose_rate(p.e, p.fd, &rates) {
            Ok(_) => jobs.extend((0..cfg.trials).map(|t| (i, t))),
            Err(err) => {
                log::warn!("skipping point {i} (snr {} dB): {err}", p.snr);
                skipped.insert(i, err.to_string());
            }
        }
    }

    let workers = cfg.workers();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let done = AtomicUsize::new(0);
    let total = jobs.len();
    let records: Vec<TrialRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, t)| {
                let p = &points[i];
                let rates = if p.scheme.is_multi_matrix() { &tables[&p.n] } else { &singles[&p.n] };
                let rec = run_trial(cfg, i, p, t, rates.clone());
                if let Some(cb) = progress {
                    cb(done.fetch_add(1, Ordering::Relaxed) + 1, total);
                }
                rec
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let summaries = aggregate(&points, &records, &skipped, workers);
    Ok(SweepOutput {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION"),
        workers,
        records,
        points: summaries,
    })
}

fn run_trial(cfg: &SweepConfig, point: usize, p: &Point, trial: usize, rates: Vec<Arc<MatrixSet>>) -> Result<TrialRecord> {
    let coords = [p.n as u64, p.snr_index as u64, trial as u64];
    let mut key_rng = seed::rng(cfg.seed, &[label("keys"), coords[0], coords[1], coords[2]]);
    let pair = gen_key_pair(p.n, p.e, &mut key_rng);
    let session_seed = seed::derive(cfg.seed, &[label("session"), coords[0], coords[1], coords[2]]);
    let session = SessionConfig {
        scheme: p.scheme,
        n_matrices: rates[0].len(),
        f_d: p.fd,
        delta: p.delta,
        max_iters: cfg.ul,
        rates,
        shared_seed: session_seed,
        local_seed: seed::derive(session_seed, &[label("local")]),
    };
    let wrap = |source| Error::Session { point, trial, source };
    let start = Instant::now();
    let mut alice = Alice::new(&pair.alice, p.e, session.for_role(Role::Alice)).map_err(wrap)?;
    let mut bob = Bob::new(&pair.bob, p.e, session.for_role(Role::Bob)).map_err(wrap)?;
    let (a, b, _) = run_local(&mut alice, &mut bob).map_err(wrap)?;
    let wall_s = start.elapsed().as_secs_f64();
    Ok(TrialRecord {
        point,
        trial,
        scheme: p.scheme,
        n: p.n,
        rate: b.rate,
        snr: p.snr,
        e: p.e,
        fd: p.fd,
        delta: p.delta,
        success: b.success,
        keys_match: a.key == b.key,
        rounds: b.rounds,
        iterations: b.iterations,
        p0: b.p0,
        s_final: b.final_s,
        f: b.efficiency,
        disclosed_bits: b.disclosed_bits,
        flips: pair.flips,
        wall_s,
    })
}
