//! Pair generation by spontaneous four-wave mixing in the ring.
//!
//! The generated power is
//!
//! ```text
//! P_sfwm = (γL)² · (Q_l·v_g / (ω_p·L/2))³ · (ħ·ω_p·v_g / 2L) · P_p²
//! ```
//!
//! and the pair rate is `G = P_sfwm / (2ħω_p)`. `P_p` is the pump power in the
//! bus waveguide at the coupling point; the cubed bracket already carries the
//! resonant enhancement, so it must not be an intracavity power.

use core::f64::consts::PI;

use crate::device::DeviceConfig;
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::quantities::{db_loss_to_transmittance, DbLoss, HBAR};

/// Kerr nonlinearity of the guided mode at the pump wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearParams {
    n2: f64,
    pump_wavelength_m: f64,
    gamma: f64,
}

impl NonlinearParams {
    /// Builds the record and derives `γ` from the mode effective area.
    pub fn new(n2_m2_per_w: f64, pump_wavelength_m: f64, effective_area_m2: f64) -> Result<Self> {
        if !(n2_m2_per_w > 0.0 && n2_m2_per_w.is_finite()) {
            return Err(Error::invalid("nonlinear.n2", "must be finite and > 0"));
        }
        if !(pump_wavelength_m > 0.0 && pump_wavelength_m.is_finite()) {
            return Err(Error::invalid("nonlinear.pump_wavelength", "must be finite and > 0"));
        }
        let gamma = nonlinear_parameter(n2_m2_per_w, pump_wavelength_m, effective_area_m2)?;
        Ok(Self {
            n2: n2_m2_per_w,
            pump_wavelength_m,
            gamma,
        })
    }

    /// Nonlinear index `n_nl`, m²/W.
    pub fn n2(&self) -> f64 {
        self.n2
    }

    /// Pump vacuum wavelength, m.
    pub fn pump_wavelength(&self) -> f64 {
        self.pump_wavelength_m
    }

    /// Nonlinear parameter `γ`, W⁻¹m⁻¹.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Generated pair power and rate at one pump power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRate {
    /// Pairs per second at the ring-bus coupling point.
    pub generated_rate: f64,
    /// Optical power carried by the generated photons, W.
    pub generated_power: f64,
}

/// `γ = 2π·n_nl/(λ_p·A_eff)`.
pub fn nonlinear_parameter(n2_m2_per_w: f64, pump_wavelength_m: f64, effective_area_m2: f64) -> Result<f64> {
    let n2 = require_positive("n2", n2_m2_per_w)?;
    let lambda = require_positive("pump_wavelength", pump_wavelength_m)?;
    let area = require_positive("effective_area", effective_area_m2)?;
    Ok(2.0 * PI * n2 / (lambda * area))
}

/// Generated SFWM power for bus pump power `pump_w`.
pub fn sfwm_power(device: &DeviceConfig, pump_w: f64) -> Result<f64> {
    let pump = require_non_negative("pump_power", pump_w)?;
    let gamma = device.nonlinear.gamma();
    let length = device.geometry.circumference();
    let v_g = device.geometry.group_velocity();
    let omega = device.pump_angular_frequency();
    let q_l = device.resonator.q_loaded();

    let gamma_l = gamma * length;
    let buildup = q_l * v_g / (omega * length / 2.0);
    let photon_flux_scale = HBAR * omega * v_g / (2.0 * length);
    Ok(gamma_l * gamma_l * buildup * buildup * buildup * photon_flux_scale * pump * pump)
}

/// Pair rate `G = P_sfwm/(2ħω_p)`, pairs/s.
pub fn pair_generation_rate(device: &DeviceConfig, pump_w: f64) -> Result<f64> {
    Ok(pair_rate(device, pump_w)?.generated_rate)
}

/// Both the generated power and the pair rate.
pub fn pair_rate(device: &DeviceConfig, pump_w: f64) -> Result<PairRate> {
    let generated_power = sfwm_power(device, pump_w)?;
    let omega = device.pump_angular_frequency();
    Ok(PairRate {
        generated_rate: generated_power / (2.0 * HBAR * omega),
        generated_power,
    })
}

/// Pair rate at the ring inferred from a measured coincidence rate and the
/// total signal and idler collection losses: `CC / 10^(−(η_s+η_i)/10)`.
pub fn infer_generation_rate(cc_rate: f64, eta_s: DbLoss, eta_i: DbLoss) -> Result<f64> {
    if !(cc_rate >= 0.0 && cc_rate.is_finite()) {
        return Err(Error::invalid("cc_rate", "must be finite and >= 0"));
    }
    Ok(cc_rate / db_loss_to_transmittance(eta_s + eta_i).value())
}
