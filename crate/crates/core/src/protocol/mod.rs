//! Reconciliation sessions for Alice and Bob.
//!
//! Four schemes share one state machine:
//!
//! * `SR` / `MR`: one communication round against one / several matrices,
//!   no puncturing.
//! * `SRCR` / `MRCR`: puncture `p0` positions up front, then shorten a few of
//!   them after every failed round until Bob decodes or none are left.
//!
//! Both parties derive the rate, the puncture budget and the punctured
//! positions independently from the shared seed, so only syndromes, reveals,
//! verdicts and aborts cross the wire.

pub mod message;
mod session;
pub mod transport;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::metrics::binary_entropy;
use crate::ldpc::MatrixSet;

pub use message::Message;
pub use session::{run_local, run_party, run_session, Alice, Bob, Party, Role, Step, Transcript, TranscriptEntry};

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration: {0}")]
    Config(String),
    #[error("transport: {0}")]
    Transport(#[from] std::io::Error),
    #[error("peer disconnected: {0}")]
    Disconnected(String),
    #[error("malformed frame: {0}")]
    Frame(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error(transparent)]
    Decoder(#[from] crate::decoder::Error),
    #[error(transparent)]
    RateAdapt(#[from] crate::rate_adapt::Error),
    #[error(transparent)]
    Ldpc(#[from] crate::ldpc::Error),
}

impl Error {
    /// True for failures of the link rather than of either party's logic.
    pub fn is_transport(&self) -> bool {
        matches!(self, Error::Transport(_) | Error::Disconnected(_) | Error::Frame(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    SR,
    MR,
    SRCR,
    MRCR,
}

impl Scheme {
    pub fn is_rate_compatible(self) -> bool {
        matches!(self, Scheme::SRCR | Scheme::MRCR)
    }

    pub fn is_multi_matrix(self) -> bool {
        matches!(self, Scheme::MR | Scheme::MRCR)
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "SR" => Ok(Scheme::SR),
            "MR" => Ok(Scheme::MR),
            "SRCR" => Ok(Scheme::SRCR),
            "MRCR" => Ok(Scheme::MRCR),
            _ => Err(format!("unknown scheme {s:?} (expected SR, MR, SRCR or MRCR)")),
        }
    }
}

/// Session parameters shared by both parties, except `local_seed`.
#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub scheme: Scheme,
    /// Number of matrices used per rate.
    pub n_matrices: usize,
    /// Target efficiency used for rate selection and the puncture budget.
    pub f_d: f64,
    /// Fraction of `p0` shortened after each failed round.
    pub delta: f64,
    /// Iteration cap per communication round.
    pub max_iters: usize,
    /// Matrix sets by ascending rate.
    pub rates: Vec<Arc<MatrixSet>>,
    /// Seed both parties agree on; drives every jointly made choice.
    pub shared_seed: u64,
    /// Party-private seed standing in for the local true random source.
    pub local_seed: u64,
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let n_ok = if self.scheme.is_multi_matrix() {
            self.n_matrices >= 2
        } else {
            self.n_matrices == 1
        };
        if !n_ok {
            return bad(format!("{} cannot run with {} matrices", self.scheme, self.n_matrices));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta {} outside (0, 1)", self.delta));
        }
        if !(self.f_d > 1.0 && self.f_d.is_finite()) {
            return bad(format!("target efficiency {} must exceed 1", self.f_d));
        }
        if self.max_iters == 0 {
            return bad("iteration cap must be at least 1".into());
        }
        let Some(first) = self.rates.first() else {
            return bad("rate table is empty".into());
        };
        for set in &self.rates {
            if set.len() != self.n_matrices {
                return bad(format!("rate {} has {} matrices, expected {}", set.rate(), set.len(), self.n_matrices));
            }
            if set.n_cols() != first.n_cols() {
                return bad("rate table mixes code lengths".into());
            }
        }
        if self.rates.windows(2).any(|w| w[0].rate() >= w[1].rate()) {
            return bad("rate table must be strictly ascending".into());
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.rates[0].n_cols()
    }
}

/// Index of the largest rate whose check fraction `1 - R0` covers `h(e) f_d`.
///
/// `rates` must be ascending. Fails when even the lowest rate is too high.
pub fn choose_rate(e: f64, f_d: f64, rates: &[f64]) -> Result<usize> {
    if !(e > 0.0 && e < 0.5) {
        return Err(Error::Config(format!("error rate {e} outside (0, 0.5)")));
    }
    let need = binary_entropy(e) * f_d;
    rates
        .iter()
        .rposition(|&r| 1.0 - r >= need)
        .ok_or_else(|| Error::Config(format!("BER {e} out of supported range: h(e) f_d = {need:.4} exceeds every 1 - R0")))
}

/// Outcome of one party's session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionResult {
    pub success: bool,
    /// Corrected key with every punctured and shortened position removed;
    /// empty on failure.
    #[serde(serialize_with = "ser_bits")]
    pub key: Vec<u8>,
    pub scheme: Scheme,
    pub n: usize,
    /// Checks per matrix of the selected rate (0 if none was admissible).
    pub m: usize,
    pub n_matrices: usize,
    pub rate: Option<f64>,
    pub p0: usize,
    pub rounds: usize,
    /// Decoder iterations summed over rounds (Bob only).
    pub iterations: usize,
    /// Punctured positions left at the end.
    pub final_p: usize,
    /// Shortened positions at the end.
    pub final_s: usize,
    /// Syndrome bits of every matrix plus revealed bits.
    pub disclosed_bits: usize,
    /// Efficiency `(m - p) / ((n - p - s) h(e))` on success.
    pub efficiency: Option<f64>,
    pub failure: Option<String>,
}

fn ser_bits<S: serde::Serializer>(bits: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::bits::to_bitstring(bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_choice() {
        let rates = [0.6, 0.7, 0.8];
        assert_eq!(choose_rate(0.067, 1.1, &rates).unwrap(), 0);
        assert_eq!(choose_rate(0.009, 1.1, &rates).unwrap(), 2);
        assert_eq!(choose_rate(0.04, 1.1, &rates).unwrap(), 1);
        assert!(matches!(choose_rate(0.25, 1.1, &rates), Err(Error::Config(_))));
        assert!(choose_rate(0.0, 1.1, &rates).is_err());
    }

    #[test]
    fn scheme_parse() {
        assert_eq!("mrcr".parse::<Scheme>(), Ok(Scheme::MRCR));
        assert!("xr".parse::<Scheme>().is_err());
        assert_eq!(Scheme::SRCR.to_string(), "SRCR");
    }
}
