//! Error type shared by every module of the core crate.

use alloc::string::String;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failures reported by the model, the simulator and the estimators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("{name} = {value} is out of domain: {requirement}")]
    Domain {
        /// Name of the offending argument.
        name: &'static str,
        /// The rejected value.
        value: f64,
        /// What the value must satisfy.
        requirement: &'static str,
    },
    /// A record violates one of its invariants. `field` is a dotted path.
    #[error("invalid `{field}`: {reason}")]
    Invalid {
        /// Dotted path of the offending field.
        field: String,
        /// Human-readable invariant that failed.
        reason: String,
    },
    /// A time-tag stream is not sorted in time.
    #[error("{channel} stream is not time-sorted at index {index}")]
    Unsorted {
        /// Which stream.
        channel: crate::montecarlo::Channel,
        /// First index whose time is smaller than its predecessor.
        index: usize,
    },
    /// The transmission spectrum has no dip above the noise floor.
    #[error("no dip found: depth {depth} is within 3x the noise estimate {noise}")]
    NoDip {
        /// Baseline minus minimum sample.
        depth: f64,
        /// Sample-to-sample noise estimate.
        noise: f64,
    },
    /// Data cannot determine the requested fit.
    #[error("degenerate data: {0}")]
    Degenerate(&'static str),
    /// A Monte Carlo run produced too few events for the requested estimate.
    #[error("insufficient counts: {0}")]
    InsufficientCounts(&'static str),
}

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            requirement: "must be finite and > 0",
        })
    }
}

pub(crate) fn require_non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            requirement: "must be finite and >= 0",
        })
    }
}
