//! Model of a microring-resonator photon-pair source driven by spontaneous
//! four-wave mixing.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! core: unit conversions, ring-resonator linear optics, the pair-generation
//! rate, the singles/coincidence/accidental noise model, a seeded Monte Carlo
//! time-tag simulator with a coincidence counter, and the least-squares
//! estimators used to pull parameters back out of data. File formats, the
//! command-line tool and parallel sweeps live in the `ringpair` crate.
//!
//! All quantities are SI internally. Decibels only appear in
//! [`quantities::DbLoss`]; time tags are integer picoseconds.

#![no_std]
#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod device;
pub mod error;
pub mod estimation;
pub mod montecarlo;
pub mod noisemodel;
pub mod pairgen;
pub mod quantities;
pub mod resonator;

pub use device::DeviceConfig;
pub use error::{Error, Result};

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
