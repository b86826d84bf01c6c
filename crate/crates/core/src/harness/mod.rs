//! Channel simulation, metrics and the sweep runner.

pub mod cache;
pub mod channel;
pub mod metrics;
pub mod sweep;
