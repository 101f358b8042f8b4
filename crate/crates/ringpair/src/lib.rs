//! File formats, parallel sweeps and the `ringpair` command-line tool on top
//! of [`ringpair_core`].
//!
//! - [`config`]: the JSON device description and its validation.
//! - [`csv_io`]: spectra, tables and time-tag files.
//! - [`results`]: JSON reports and run manifests.
//! - [`sweep`]: rayon-parallel power sweeps and Monte Carlo replicates.
//! - [`cli`]: the subcommands behind the binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod output;
pub mod results;
pub mod sweep;

pub use error::{Error, ExitCode, Result};
pub use ringpair_core;
