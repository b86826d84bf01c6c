//! LLR belief propagation against one or several parity-check matrices.
//!
//! Bob's word is decoded against `N` syndromes at once. Each matrix runs its
//! own check-to-variable and variable-to-check message tables from the shared
//! per-bit prior; the matrices meet only in the soft decision, which sums the
//! check messages of every matrix. A communication round keeps iterating
//! until either every syndrome matches (success), the estimated error rate of
//! the word rises (the word is rolled back to the previous iteration), or the
//! iteration cap is hit.
//!
//! [`DecoderState`] is the general `N`-matrix decoder; [`SingleDecoder`] is the
//! classic single-matrix decoder. Both share the check-node kernel, and with
//! `N = 1` they produce identical hard decisions at every iteration.

mod kernel;
mod multi;
mod single;

use serde::Serialize;
use thiserror::Error;

use crate::ldpc::{MatrixSet, Syndrome};

pub use multi::DecoderState;
pub use single::SingleDecoder;

/// Saturation magnitude for every stored LLR, standing in for the infinite
/// prior of a shortened bit. A belief of 30 is an error probability near
/// 1e-13; anything larger only pushes `tanh` arguments onto exactly ±1.
pub const DEFAULT_LLR_MAX: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid decoder config: {0}")]
    Config(String),
    #[error("word has {got} bits, code length is {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("expected {expected} syndromes of {m} bits")]
    Syndromes { expected: usize, m: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoderConfig {
    /// Channel error-rate prior.
    pub e: f64,
    /// Iteration cap per communication round.
    pub max_iters: usize,
    pub llr_max: f64,
}

impl DecoderConfig {
    pub fn new(e: f64, max_iters: usize) -> Result<Self> {
        let cfg = Self {
            e,
            max_iters,
            llr_max: DEFAULT_LLR_MAX,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e > 0.0 && self.e < 0.5) {
            return Err(Error::Config(format!("error rate {} outside (0, 0.5)", self.e)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("iteration cap must be at least 1".into()));
        }
        if !(self.llr_max > 0.0 && self.llr_max.is_finite()) {
            return Err(Error::Config(format!("llr_max {} must be positive and finite", self.llr_max)));
        }
        Ok(())
    }

    /// Prior LLR magnitude `ln((1 - e) / e)`.
    pub fn channel_llr(&self) -> f64 {
        ((1.0 - self.e) / self.e).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RoundOutcome {
    Success,
    ErrorRateRose,
    IterationCapHit,
}

/// One line of the optional per-iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iteration: usize,
    pub error_estimate: f64,
    pub unsatisfied: Vec<usize>,
}

impl IterationTrace {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }
}

/// Operations the round driver needs from a decoder.
pub trait BpDecoder {
    /// One flooding sweep: all check updates, then all variable updates and
    /// the hard decision.
    fn iterate(&mut self, set: &MatrixSet, syndromes: &[Syndrome]);
    fn word(&self) -> &[u8];
    /// Replaces the word estimate (used to roll back an iteration).
    fn restore_word(&mut self, word: Vec<u8>);
    /// Error rate accepted at the previous iteration.
    fn error_estimate(&self) -> f64;
    fn set_error_estimate(&mut self, e: f64);
    /// Iterations run since the decoder was initialized.
    fn iterations(&self) -> usize;
}

/// Unsatisfied-check count of `word` against each matrix.
pub fn unsatisfied_counts(word: &[u8], set: &MatrixSet, syndromes: &[Syndrome]) -> Vec<usize> {
    set.matrices()
        .iter()
        .zip(syndromes)
        .map(|(h, z)| h.count_unsatisfied(word, z))
        .collect()
}

/// True iff `word` reproduces every syndrome.
pub fn check_syndromes(word: &[u8], set: &MatrixSet, syndromes: &[Syndrome]) -> bool {
    syndromes.len() == set.len()
        && set
            .matrices()
            .iter()
            .zip(syndromes)
            .all(|(h, z)| h.count_unsatisfied(word, z) == 0)
}

/// Error-rate estimate from unsatisfied checks, averaged over matrices.
///
/// A check of degree `d` is unsatisfied with probability
/// `(1 - (1 - 2 eps)^d) / 2` when bits are wrong independently with
/// probability `eps`. Each matrix's unsatisfied fraction `u` is inverted
/// through that relation using the mean check degree.
pub fn estimate_error_rate(word: &[u8], set: &MatrixSet, syndromes: &[Syndrome]) -> f64 {
    estimate_from_counts(set, &unsatisfied_counts(word, set, syndromes))
}

fn estimate_from_counts(set: &MatrixSet, counts: &[usize]) -> f64 {
    let total: f64 = set
        .matrices()
        .iter()
        .zip(counts)
        .map(|(h, &c)| invert_unsatisfied(c as f64 / h.n_rows() as f64, h.mean_row_degree()))
        .sum();
    total / set.len() as f64
}

/// `(1 - (1 - 2u)^(1/d)) / 2` with `u` clamped into `[0, 0.5 - eps]`.
pub fn invert_unsatisfied(u: f64, mean_degree: f64) -> f64 {
    let u = u.clamp(0.0, 0.5 - f64::EPSILON);
    (1.0 - (1.0 - 2.0 * u).powf(1.0 / mean_degree)) / 2.0
}

/// Runs one communication round.
///
/// After every iteration: success if all syndromes match; otherwise the error
/// rate is re-estimated and, if it rose above the last accepted value, the
/// word is rolled back to its state before the iteration and the round ends.
/// Otherwise the estimate is accepted and iteration continues, up to
/// `cfg.max_iters` iterations.
pub fn decode_round<D: BpDecoder + ?Sized>(
    dec: &mut D,
    set: &MatrixSet,
    syndromes: &[Syndrome],
    cfg: &DecoderConfig,
    mut trace: Option<&mut dyn FnMut(&IterationTrace)>,
) -> RoundOutcome {
    for it in 1..=cfg.max_iters {
        let snapshot = dec.word().to_vec();
        dec.iterate(set, syndromes);
        let counts = unsatisfied_counts(dec.word(), set, syndromes);
        let estimate = estimate_from_counts(set, &counts);
        if let Some(t) = trace.as_deref_mut() {
            t(&IterationTrace {
                iteration: it,
                error_estimate: estimate,
                unsatisfied: counts.clone(),
            });
        }
        if counts.iter().all(|&c| c == 0) {
            return RoundOutcome::Success;
        }
        if estimate > dec.error_estimate() {
            dec.restore_word(snapshot);
            return RoundOutcome::ErrorRateRose;
        }
        dec.set_error_estimate(estimate);
    }
    RoundOutcome::IterationCapHit
}

pub(crate) fn check_inputs(set: &MatrixSet, word_len: usize) -> Result<()> {
    if word_len != set.n_cols() {
        return Err(Error::LengthMismatch {
            expected: set.n_cols(),
            got: word_len,
        });
    }
    Ok(())
}

pub(crate) fn check_syndrome_shape(set: &MatrixSet, syndromes: &[Syndrome]) -> Result<()> {
    if syndromes.len() != set.len() || syndromes.iter().any(|z| z.len() != set.n_rows()) {
        return Err(Error::Syndromes {
            expected: set.len(),
            m: set.n_rows(),
        });
    }
    Ok(())
}

/// Per-bit prior LLRs: `±ln((1-e)/e)` for ordinary bits, 0 for punctured,
/// `±llr_max` for shortened, signed positive for bit 0.
pub(crate) fn log_priors(word: &[u8], plan: &crate::rate_adapt::PuncturePlan, cfg: &DecoderConfig) -> Vec<f64> {
    let l = cfg.channel_llr();
    word.iter()
        .enumerate()
        .map(|(i, &b)| {
            let sign = if b == 0 { 1.0 } else { -1.0 };
            if plan.is_shortened(i) {
                sign * cfg.llr_max
            } else if plan.is_punctured(i) {
                0.0
            } else {
                sign * l
            }
        })
        .collect()
}
