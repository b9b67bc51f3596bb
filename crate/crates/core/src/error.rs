//! Error type shared across the crate.

use thiserror::Error;

/// Failure modes surfaced by model validation, bound evaluation, and the
/// Monte Carlo verifiers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation
    /// (e.g. a negative opinion gap passed to an influence function).
    #[error("domain error: {0}")]
    Domain(String),

    /// A specification or configuration violates its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Bound parameters fall outside the validity window of the regime.
    /// `inequality` names the violated condition so callers can report it.
    #[error("regime violation: {inequality} required; {detail}")]
    Regime { inequality: String, detail: String },

    /// A conditional estimator retained too few samples to report a verdict.
    #[error("insufficient samples: {accepted} accepted, floor is {floor}")]
    InsufficientSamples { accepted: u64, floor: u64 },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn regime(inequality: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Regime {
            inequality: inequality.into(),
            detail: detail.into(),
        }
    }
}
