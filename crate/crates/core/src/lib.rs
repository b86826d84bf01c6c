//! Rate-compatible LDPC information reconciliation for QKD post-processing.
//!
//! The crate covers the whole pipeline between a pair of sifted keys and a
//! corrected key:
//!
//! * [`ldpc`]: sparse parity-check matrices, multi-matrix sets, PEG
//!   construction, alist I/O and syndromes.
//! * [`rate_adapt`]: the initial puncturing budget, untainted puncturing for
//!   one matrix (UPA) or several (MUPA), and puncture-to-shorten conversion.
//! * [`decoder`]: LLR belief propagation against one or more matrices at once,
//!   with the comparison-of-error-rates stop rule.
//! * [`protocol`]: Alice and Bob session state machines for SR, MR, SRCR and
//!   MRCR over an abstract message transport.
//! * [`harness`]: BSC channel simulation, efficiency and throughput metrics,
//!   and the Monte Carlo sweep runner.

pub mod bits;
pub mod decoder;
pub mod harness;
pub mod ldpc;
pub mod protocol;
pub mod rate_adapt;
pub mod seed;

pub use decoder::{DecoderConfig, DecoderState, RoundOutcome};
pub use harness::metrics::{binary_entropy, efficiency, throughput};
pub use ldpc::{MatrixSet, ParityCheckMatrix, Syndrome};
pub use protocol::{Message, Scheme, SessionConfig, SessionResult};
pub use rate_adapt::PuncturePlan;
