//! JSON records written by the command-line tool.

use ringpair_core::estimation::{Estimate, LorentzianFit};
use ringpair_core::montecarlo::{CoincidenceResult, RNG_ALGORITHM};
use ringpair_core::resonator::{intrinsic_loss_db_per_cm, CouplingBranch};
use ringpair_core::quantities::SPEED_OF_LIGHT;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One delay-histogram bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    /// Bin centre, ps.
    pub tau_ps: f64,
    pub count: u64,
}

/// Coincidence analysis of a tag file. `car` is `null` when there were no
/// accidentals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceReport {
    pub cc: u64,
    pub ac: u64,
    pub car: Option<f64>,
    pub car_stderr: Option<f64>,
    pub window_ps: u64,
    pub offset_ps: u64,
    pub duration_s: f64,
    pub singles_signal: u64,
    pub singles_idler: u64,
    pub histogram: Vec<HistogramBin>,
}

impl From<&CoincidenceResult> for CoincidenceReport {
    fn from(r: &CoincidenceResult) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        Self {
            cc: r.cc_count,
            ac: r.ac_count,
            car: finite(r.car_estimate),
            car_stderr: finite(r.car_stderr),
            window_ps: r.window_ps,
            offset_ps: r.accidental_offset_ps,
            duration_s: r.duration_s,
            singles_signal: r.singles_signal,
            singles_idler: r.singles_idler,
            histogram: r
                .histogram
                .iter()
                .map(|(tau_ps, count)| HistogramBin { tau_ps, count })
                .collect(),
        }
    }
}

/// A value with its 1σ uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueWithError {
    pub value: f64,
    pub stderr: f64,
}

impl From<Estimate> for ValueWithError {
    fn from(e: Estimate) -> Self {
        Self { value: e.value, stderr: e.stderr }
    }
}

/// Intrinsic Q under each coupling hypothesis; `null` where undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicQ {
    pub under: Option<f64>,
    pub over: Option<f64>,
    pub critical: Option<f64>,
}

/// Lorentzian fit of a transmission spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionReport {
    pub center_hz: ValueWithError,
    pub q_loaded: ValueWithError,
    pub t_min: ValueWithError,
    pub baseline: ValueWithError,
    pub linewidth_hz: f64,
    pub branch: String,
    pub q_intrinsic: Option<f64>,
    pub q_intrinsic_by_branch: IntrinsicQ,
    pub group_index: Option<f64>,
    pub loss_db_per_cm: Option<f64>,
    pub reduced_chi_square: f64,
    pub converged: bool,
    pub iterations: usize,
    pub samples: usize,
}

/// Lower-case name of a coupling branch.
pub fn branch_name(branch: CouplingBranch) -> &'static str {
    match branch {
        CouplingBranch::Under => "under",
        CouplingBranch::Over => "over",
        CouplingBranch::Critical => "critical",
    }
}

impl TransmissionReport {
    /// Summarises a fit; the loss is only computed when `group_index` is set.
    pub fn new(fit: &LorentzianFit, branch: CouplingBranch, group_index: Option<f64>, samples: usize) -> Self {
        let q = |b| fit.q_intrinsic(b).ok();
        let q_intrinsic = q(branch);
        let wavelength = SPEED_OF_LIGHT / fit.center_hz.value;
        let loss_db_per_cm = group_index
            .zip(q_intrinsic)
            .and_then(|(n_g, q_i)| intrinsic_loss_db_per_cm(q_i, wavelength, n_g).ok());
        Self {
            center_hz: fit.center_hz.into(),
            q_loaded: fit.q_loaded.into(),
            t_min: fit.t_min.into(),
            baseline: fit.baseline.into(),
            linewidth_hz: fit.linewidth_hz(),
            branch: branch_name(branch).into(),
            q_intrinsic,
            q_intrinsic_by_branch: IntrinsicQ {
                under: q(CouplingBranch::Under),
                over: q(CouplingBranch::Over),
                critical: q(CouplingBranch::Critical),
            },
            group_index,
            loss_db_per_cm,
            reduced_chi_square: fit.report.reduced_chi_square,
            converged: fit.report.converged,
            iterations: fit.report.iterations,
            samples,
        }
    }
}

/// Provenance of one command run: enough to repeat it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    /// SHA-256 of the configuration or input file, hex.
    pub input_sha256: Option<String>,
    pub seed: Option<u64>,
    pub rng_algorithm: String,
    pub ringpair_version: String,
    pub ringpair_core_version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, arguments: Vec<String>) -> Self {
        Self {
            command: command.into(),
            arguments,
            input_sha256: None,
            seed: None,
            rng_algorithm: RNG_ALGORITHM.into(),
            ringpair_version: env!("CARGO_PKG_VERSION").into(),
            ringpair_core_version: ringpair_core::VERSION.into(),
            outputs: Vec::new(),
        }
    }
}

/// Lower-case hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
