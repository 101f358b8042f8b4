//! Parallel versions of the power sweep and the replicated Monte Carlo.
//!
//! Work is split per power point or per replicate; every replicate draws from
//! its own stream of the seed, so results do not depend on the thread count
//! or scheduling order.

use rayon::prelude::*;
use ringpair_core::montecarlo::{
    default_accidental_offset, replicate_car, CarEstimate, CoincidenceResult, CoincidenceSettings, SourceModel,
};
use ringpair_core::noisemodel::{car_point, CarPoint};
use ringpair_core::{DeviceConfig, Error, Result};

/// `n` evenly spaced values from `lo` to `hi` inclusive; `[lo]` when `n = 1`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Analytic CAR curve over ascending `powers_w`, one point per thread task.
pub fn par_car_curve(device: &DeviceConfig, powers_w: &[f64]) -> Result<Vec<CarPoint>> {
    if powers_w.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Invalid {
            field: "powers".into(),
            reason: "pump powers must be ascending".into(),
        });
    }
    powers_w.par_iter().map(|&p| car_point(device, p)).collect()
}

/// Default analysis settings for a device: its window, 64 windows of
/// accidental offset, and 16 histogram bins per window.
pub fn device_settings(device: &DeviceConfig) -> Result<CoincidenceSettings> {
    let window = device.chain.window_ps();
    CoincidenceSettings::new(window, default_accidental_offset(window), window.div_ceil(16).max(1))
}

/// All replicates of one source, in replicate order.
pub fn par_replicates(
    model: &SourceModel,
    settings: &CoincidenceSettings,
    duration_s: f64,
    seed: u64,
    replicates: u32,
) -> Result<Vec<CoincidenceResult>> {
    (0..u64::from(replicates))
        .into_par_iter()
        .map(|k| replicate_car(model, settings, duration_s, seed, k))
        .collect()
}

/// Replicated Monte Carlo CAR for an explicit source model.
pub fn par_estimate_car_source(
    model: &SourceModel,
    settings: &CoincidenceSettings,
    duration_s: f64,
    seed: u64,
    replicates: u32,
) -> Result<CarEstimate> {
    if replicates < 2 {
        return Err(Error::Invalid {
            field: "replicates".into(),
            reason: "need at least 2".into(),
        });
    }
    let runs = par_replicates(model, settings, duration_s, seed, replicates)?;
    CarEstimate::from_replicates(runs.iter().map(|r| r.car_estimate).collect())
}

/// Replicated Monte Carlo CAR for a device at one pump power. Gives the same
/// result as the serial `estimate_car_mc`.
pub fn par_estimate_car_mc(
    device: &DeviceConfig,
    pump_w: f64,
    duration_s: f64,
    seed: u64,
    replicates: u32,
) -> Result<CarEstimate> {
    let model = SourceModel::from_device(device, pump_w)?;
    par_estimate_car_source(&model, &device_settings(device)?, duration_s, seed, replicates)
}
