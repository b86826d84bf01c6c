use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::ValueEnum;
use serde::Serialize;

use recon::bits::parse_bitstring;
use recon::harness::channel::{gen_key_pair, snr_to_ber};
use recon::protocol::transport::StreamTransport;
use recon::protocol::{choose_rate, run_local, run_party, Alice, Bob, Role, Transcript};
use recon::seed::{self, label};
use recon::{MatrixSet, Scheme, SessionConfig, SessionResult};

use crate::error::{CliError, Result};
use crate::matrices::{table_auto, table_from_files};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PartyArg {
    Alice,
    Bob,
}

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    #[arg(long, default_value = "MRCR")]
    scheme: Scheme,
    /// alist files: N per rate, all with the same code length. Without
    /// them, matrices are built from --n, --rate, --N and --matrix-seed.
    #[arg(long = "matrix", num_args = 1..)]
    matrices: Vec<PathBuf>,
    #[arg(long, default_value_t = 5000)]
    n: usize,
    /// Rate table (comma separated).
    #[arg(long = "rate", value_delimiter = ',', default_values_t = [0.6, 0.7, 0.8])]
    rates: Vec<f64>,
    /// Matrices per rate; defaults to 3 for MR/MRCR and 1 otherwise.
    #[arg(long = "N")]
    count: Option<usize>,
    #[arg(long, default_value_t = 1)]
    matrix_seed: u64,
    /// Directory for cached alist files.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Channel error rate given to the protocol.
    #[arg(long, conflicts_with = "snr", required_unless_present = "snr")]
    e: Option<f64>,
    /// SNR in dB, mapped to an error rate.
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long, default_value_t = 1.1)]
    fd: f64,
    #[arg(long, default_value_t = 0.02)]
    delta: f64,
    /// Iteration cap per round.
    #[arg(long, default_value_t = 100)]
    ul: usize,
    /// Shared seed: key generation and every jointly made choice.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Private seed; each role derives its own stream from it.
    #[arg(long)]
    local_seed: Option<u64>,
    /// Flip probability used to simulate Bob's key (defaults to the error rate).
    #[arg(long)]
    flip_rate: Option<f64>,
    /// Alice's key as a 0/1 text file.
    #[arg(long, requires = "bob_key")]
    alice_key: Option<PathBuf>,
    /// Bob's key as a 0/1 text file.
    #[arg(long, requires = "alice_key")]
    bob_key: Option<PathBuf>,
    /// Serve one peer on this address (two-process mode).
    #[arg(long, conflicts_with = "connect")]
    listen: Option<String>,
    /// Connect to a listening peer (two-process mode).
    #[arg(long)]
    connect: Option<String>,
    /// Seconds to keep retrying --connect before giving up.
    #[arg(long, default_value_t = 10.0)]
    connect_timeout: f64,
    /// Role in two-process mode; defaults to alice when listening, bob when
    /// connecting.
    #[arg(long, value_enum)]
    role: Option<PartyArg>,
    /// Write the message transcript as JSON lines.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Serialize)]
struct Replay<'a> {
    version: &'static str,
    e: f64,
    args: &'a Args,
}

#[derive(Serialize)]
struct LocalReport<'a> {
    result: &'a SessionResult,
    alice: &'a SessionResult,
    keys_match: bool,
    transcript_bytes: usize,
    replay: Replay<'a>,
}

#[derive(Serialize)]
struct PartyReport<'a> {
    role: Role,
    result: &'a SessionResult,
    transcript_bytes: usize,
    replay: Replay<'a>,
}

fn read_key(path: &Path) -> Result<Vec<u8>> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_bitstring(text.trim()).ok_or_else(|| CliError::Config(format!("{}: key must contain only 0 and 1", path.display())))
}

fn write_transcript(path: Option<&Path>, t: &Transcript) -> Result<()> {
    if let Some(path) = path {
        std::fs::write(path, t.to_jsonl()).map_err(CliError::io(path))?;
    }
    Ok(())
}

fn connect_with_retry(addr: &str, timeout_s: f64) -> Result<StreamTransport> {
    let deadline = Instant::now() + Duration::from_secs_f64(timeout_s.max(0.0));
    loop {
        match StreamTransport::connect(addr) {
            Ok(t) => return Ok(t),
            Err(e) if Instant::now() >= deadline => return Err(CliError::Transport(format!("connect {addr}: {e}"))),
            Err(e) => {
                log::debug!("connect {addr}: {e}; retrying");
                std::thread::sleep(Duration::from_millis(100));
            }
        }
    }
}

fn verdict(result: &SessionResult) -> Result<()> {
    if result.success {
        Ok(())
    } else {
        Err(CliError::DecodeFailed(result.failure.clone().unwrap_or_default()))
    }
}

pub fn run(a: Args) -> Result<()> {
    let e = match (a.e, a.snr) {
        (Some(e), _) => e,
        (None, Some(snr)) if snr.is_finite() => snr_to_ber(snr),
        _ => return Err(CliError::Config("give --e or a finite --snr".into())),
    };
    let count = a.count.unwrap_or(if a.scheme.is_multi_matrix() { 3 } else { 1 });
    let rates: Vec<Arc<MatrixSet>> = if a.matrices.is_empty() {
        table_auto(a.n, &a.rates, count, a.matrix_seed, a.cache.as_deref())?
    } else {
        table_from_files(&a.matrices, count)?
    };
    let cfg = SessionConfig {
        scheme: a.scheme,
        n_matrices: count,
        f_d: a.fd,
        delta: a.delta,
        max_iters: a.ul,
        rates,
        shared_seed: a.seed,
        local_seed: a.local_seed.unwrap_or(a.seed),
    };
    cfg.validate()?;
    let table: Vec<f64> = cfg.rates.iter().map(|s| s.rate()).collect();
    choose_rate(e, cfg.f_d, &table)?;

    let n = cfg.n();
    let (x, y) = match (&a.alice_key, &a.bob_key) {
        (Some(pa), Some(pb)) => (read_key(pa)?, read_key(pb)?),
        _ => {
            let flip = a.flip_rate.unwrap_or(e);
            if !(0.0..0.5).contains(&flip) {
                return Err(CliError::Config(format!("flip rate {flip} outside [0, 0.5)")));
            }
            let pair = gen_key_pair(n, flip, &mut seed::rng(a.seed, &[label("keys")]));
            log::info!("simulated keys: n={n}, {} flips", pair.flips);
            (pair.alice, pair.bob)
        }
    };

    if a.listen.is_none() && a.connect.is_none() {
        let mut alice = Alice::new(&x, e, cfg.for_role(Role::Alice))?;
        let mut bob = Bob::new(&y, e, cfg.for_role(Role::Bob))?;
        let (ra, rb, t) = run_local(&mut alice, &mut bob)?;
        write_transcript(a.transcript.as_deref(), &t)?;
        crate::print_json(&LocalReport {
            result: &rb,
            alice: &ra,
            keys_match: ra.key == rb.key,
            transcript_bytes: t.total_bytes(),
            replay: Replay {
                version: env!("CARGO_PKG_VERSION"),
                e,
                args: &a,
            },
        })?;
        return verdict(&rb);
    }

    let mut transport = match (&a.listen, &a.connect) {
        (Some(addr), _) => {
            let listener = TcpListener::bind(addr).map_err(|e| CliError::Transport(format!("bind {addr}: {e}")))?;
            log::info!("listening on {}", listener.local_addr().map(|x| x.to_string()).unwrap_or_default());
            StreamTransport::accept(&listener)?
        }
        (None, Some(addr)) => connect_with_retry(addr, a.connect_timeout)?,
        (None, None) => unreachable!(),
    };
    let role = match a.role {
        Some(PartyArg::Alice) => Role::Alice,
        Some(PartyArg::Bob) => Role::Bob,
        None if a.listen.is_some() => Role::Alice,
        None => Role::Bob,
    };
    let (result, t) = match role {
        Role::Alice => run_party(&mut Alice::new(&x, e, cfg.for_role(role))?, &mut transport)?,
        Role::Bob => run_party(&mut Bob::new(&y, e, cfg.for_role(role))?, &mut transport)?,
    };
    write_transcript(a.transcript.as_deref(), &t)?;
    crate::print_json(&PartyReport {
        role,
        result: &result,
        transcript_bytes: t.total_bytes(),
        replay: Replay {
            version: env!("CARGO_PKG_VERSION"),
            e,
            args: &a,
        },
    })?;
    verdict(&result)
}
