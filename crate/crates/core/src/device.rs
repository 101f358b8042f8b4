//! The full physical description of one source: ring, pump, noise and
//! detection chain.

use alloc::format;
use alloc::string::String;

use crate::error::{Error, Result};
use crate::noisemodel::{DetectionChain, NoiseParams};
use crate::pairgen::NonlinearParams;
use crate::quantities::{wavelength_to_frequency, SPEED_OF_LIGHT};
use crate::resonator::{RingGeometry, ResonatorParams};

/// Relative mismatch in `2/λ_p = 1/λ_s + 1/λ_i` above which a configuration
/// is rejected.
pub const ENERGY_CONSERVATION_TOLERANCE: f64 = 1e-4;

/// Mismatch above which a configuration is accepted but flagged.
pub const ENERGY_CONSERVATION_WARNING: f64 = 1e-6;

/// Every model input in one record.
///
/// Each component type validates itself on construction; [`DeviceConfig::new`]
/// adds the cross-field checks. The fields are public so that sweeps can swap a
/// component, after which [`DeviceConfig::validate`] should be called again.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceConfig {
    /// Ring geometry and modal quantities.
    pub geometry: RingGeometry,
    /// Resonance at the pump wavelength.
    pub resonator: ResonatorParams,
    /// Kerr nonlinearity and pump wavelength.
    pub nonlinear: NonlinearParams,
    /// Signal (blue) vacuum wavelength, m.
    pub signal_wavelength_m: f64,
    /// Idler (red) vacuum wavelength, m.
    pub idler_wavelength_m: f64,
    /// Raman and dark-count parameters.
    pub noise: NoiseParams,
    /// Collection losses, coincidence window and detector response.
    pub chain: DetectionChain,
    /// Free-form description.
    pub metadata: String,
}

impl DeviceConfig {
    /// Assembles and validates a configuration.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        geometry: RingGeometry,
        resonator: ResonatorParams,
        nonlinear: NonlinearParams,
        signal_wavelength_m: f64,
        idler_wavelength_m: f64,
        noise: NoiseParams,
        chain: DetectionChain,
        metadata: String,
    ) -> Result<Self> {
        let config = Self {
            geometry,
            resonator,
            nonlinear,
            signal_wavelength_m,
            idler_wavelength_m,
            noise,
            chain,
            metadata,
        };
        config.validate()?;
        Ok(config)
    }

    /// Cross-field invariants: positive wavelengths, energy conservation and
    /// a `γ` consistent with the geometry's effective area.
    pub fn validate(&self) -> Result<()> {
        for (field, value) in [
            ("wavelengths.signal", self.signal_wavelength_m),
            ("wavelengths.idler", self.idler_wavelength_m),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(field, "must be finite and > 0"));
            }
        }
        let mismatch = self.energy_mismatch();
        if mismatch > ENERGY_CONSERVATION_TOLERANCE {
            return Err(Error::invalid(
                "wavelengths",
                format!(
                    "2/λp = 1/λs + 1/λi violated: relative mismatch {mismatch:.3e} > {ENERGY_CONSERVATION_TOLERANCE:e}"
                ),
            ));
        }
        let expected = crate::pairgen::nonlinear_parameter(
            self.nonlinear.n2(),
            self.nonlinear.pump_wavelength(),
            self.geometry.effective_area(),
        )?;
        if ((self.nonlinear.gamma() - expected) / expected).abs() > 1e-9 {
            return Err(Error::invalid(
                "nonlinear.gamma",
                "inconsistent with n2, pump wavelength and effective area",
            ));
        }
        Ok(())
    }

    /// Relative mismatch `|(1/λ_s + 1/λ_i)/(2/λ_p) − 1|`.
    pub fn energy_mismatch(&self) -> f64 {
        let pump = 2.0 / self.nonlinear.pump_wavelength();
        let pair = 1.0 / self.signal_wavelength_m + 1.0 / self.idler_wavelength_m;
        (pair / pump - 1.0).abs()
    }

    /// Pump angular frequency, rad/s.
    pub fn pump_angular_frequency(&self) -> f64 {
        2.0 * core::f64::consts::PI * SPEED_OF_LIGHT / self.nonlinear.pump_wavelength()
    }

    /// Raman shift seen by signal and idler, taken as half their frequency
    /// separation, Hz.
    pub fn raman_detuning_hz(&self) -> f64 {
        let nu_s = wavelength_to_frequency(self.signal_wavelength_m).unwrap_or(0.0);
        let nu_i = wavelength_to_frequency(self.idler_wavelength_m).unwrap_or(0.0);
        (nu_s - nu_i).abs() / 2.0
    }

    /// Cavity photon lifetime `Q_l/ω_p`, s.
    pub fn photon_lifetime(&self) -> f64 {
        self.resonator.q_loaded() / self.pump_angular_frequency()
    }
}
