//! All-pass ring resonator: Lorentzian transmission dip, Q bookkeeping,
//! propagation loss, linewidth, photon lifetime and field build-up.

use core::f64::consts::{LOG10_E, PI};

use crate::error::{require_positive, Error, Result};
use crate::quantities::{wavelength_to_angular_frequency, Transmittance, SPEED_OF_LIGHT};

/// Ring geometry and the modal quantities that enter the pair rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingGeometry {
    radius_m: f64,
    group_index: f64,
    effective_area_m2: f64,
}

impl RingGeometry {
    /// Validates `radius > 0`, `n_g > 1` and `A_eff > 0`.
    pub fn new(radius_m: f64, group_index: f64, effective_area_m2: f64) -> Result<Self> {
        if !(radius_m > 0.0 && radius_m.is_finite()) {
            return Err(Error::invalid("geometry.radius", "must be finite and > 0"));
        }
        if !(group_index > 1.0 && group_index.is_finite()) {
            return Err(Error::invalid("geometry.group_index", "must be finite and > 1"));
        }
        if !(effective_area_m2 > 0.0 && effective_area_m2.is_finite()) {
            return Err(Error::invalid("geometry.effective_area", "must be finite and > 0"));
        }
        Ok(Self {
            radius_m,
            group_index,
            effective_area_m2,
        })
    }

    /// Ring radius, m.
    pub fn radius(&self) -> f64 {
        self.radius_m
    }

    /// Circumference `L = 2π·r`, m.
    pub fn circumference(&self) -> f64 {
        2.0 * PI * self.radius_m
    }

    /// Group index `n_g`.
    pub fn group_index(&self) -> f64 {
        self.group_index
    }

    /// Group velocity `c/n_g`, m/s.
    pub fn group_velocity(&self) -> f64 {
        SPEED_OF_LIGHT / self.group_index
    }

    /// Mode effective area, m².
    pub fn effective_area(&self) -> f64 {
        self.effective_area_m2
    }

    /// Free spectral range `v_g/L`, Hz.
    pub fn free_spectral_range(&self) -> f64 {
        self.group_velocity() / self.circumference()
    }
}

/// Which side of critical coupling a measured dip sits on.
///
/// A power spectrum alone cannot tell under- from over-coupling, so the
/// caller has to say.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingBranch {
    /// `Q_c > Q_i`.
    Under,
    /// `Q_c < Q_i`.
    Over,
    /// `Q_c = Q_i`; the residual extinction is ignored.
    #[default]
    Critical,
}

/// Linear-optics parameters of one resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorParams {
    resonance_hz: f64,
    q_intrinsic: f64,
    q_coupling: f64,
    q_loaded: f64,
    extinction: Transmittance,
}

impl ResonatorParams {
    /// Builds the record from intrinsic and coupling Q; the loaded Q is
    /// derived. `q_coupling` may be `+inf` (uncoupled ring).
    pub fn new(
        resonance_hz: f64,
        q_intrinsic: f64,
        q_coupling: f64,
        extinction: Transmittance,
    ) -> Result<Self> {
        if !(resonance_hz > 0.0 && resonance_hz.is_finite()) {
            return Err(Error::invalid("resonator.resonance_frequency", "must be finite and > 0"));
        }
        if !(q_intrinsic > 0.0 && q_intrinsic.is_finite()) {
            return Err(Error::invalid("resonator.q_intrinsic", "must be finite and > 0"));
        }
        if !(q_coupling > 0.0) {
            return Err(Error::invalid("resonator.q_coupling", "must be > 0"));
        }
        let q_loaded = loaded_q(q_intrinsic, q_coupling)?;
        Ok(Self {
            resonance_hz,
            q_intrinsic,
            q_coupling,
            q_loaded,
            extinction,
        })
    }

    /// Resonance frequency ν₀, Hz.
    pub fn resonance_frequency(&self) -> f64 {
        self.resonance_hz
    }

    /// Intrinsic (loss-limited) Q.
    pub fn q_intrinsic(&self) -> f64 {
        self.q_intrinsic
    }

    /// Coupling Q.
    pub fn q_coupling(&self) -> f64 {
        self.q_coupling
    }

    /// Loaded Q, `1/(1/Q_i + 1/Q_c)`.
    pub fn q_loaded(&self) -> f64 {
        self.q_loaded
    }

    /// On-resonance transmittance relative to the off-resonance baseline.
    pub fn extinction(&self) -> Transmittance {
        self.extinction
    }

    /// Loaded full width at half depth, Hz.
    pub fn linewidth(&self) -> f64 {
        self.resonance_hz / self.q_loaded
    }
}

/// Harmonic combination `1/(1/Q_i + 1/Q_c)`. An infinite `q_coupling`
/// returns `q_intrinsic` unchanged.
pub fn loaded_q(q_intrinsic: f64, q_coupling: f64) -> Result<f64> {
    let qi = require_positive("q_intrinsic", q_intrinsic)?;
    if q_coupling == f64::INFINITY {
        return Ok(qi);
    }
    let qc = require_positive("q_coupling", q_coupling)?;
    if qi == qc {
        return Ok(qi / 2.0);
    }
    Ok(qi * qc / (qi + qc))
}

/// Lorentzian dip `1 − (1 − T_min)/(1 + (2Δν/Δν_FWHM)²)` with
/// `Δν_FWHM = ν₀/Q_l` and `T_min` the extinction.
pub fn transmission_dip(detuning_hz: f64, params: &ResonatorParams) -> Transmittance {
    let t_min = params.extinction.value();
    let z = 2.0 * detuning_hz / params.linewidth();
    let t = 1.0 - (1.0 - t_min) / (1.0 + z * z);
    // clamp guards the last ulp; the expression is within [t_min, 1] analytically
    Transmittance::new(t.clamp(0.0, 1.0)).expect("clamped to unit interval")
}

/// Propagation loss in dB/cm implied by an intrinsic Q:
/// `α = 2π·n_g/(λ·Q_i)` (power, m⁻¹) converted with `10·log10(e)` dB per neper-of-power.
pub fn intrinsic_loss_db_per_cm(q_intrinsic: f64, wavelength_m: f64, group_index: f64) -> Result<f64> {
    let q = require_positive("q_intrinsic", q_intrinsic)?;
    let lambda = require_positive("wavelength", wavelength_m)?;
    let ng = require_positive("group_index", group_index)?;
    let alpha_per_m = 2.0 * PI * ng / (lambda * q);
    Ok(alpha_per_m * 10.0 * LOG10_E / 100.0)
}

/// Loaded linewidth `(c/λ)/Q_l`, Hz. This is also the bandwidth of the
/// generated photons.
pub fn linewidth_hz(q_loaded: f64, wavelength_m: f64) -> Result<f64> {
    let q = require_positive("q_loaded", q_loaded)?;
    let lambda = require_positive("wavelength", wavelength_m)?;
    Ok(SPEED_OF_LIGHT / lambda / q)
}

/// Cavity energy lifetime `Q_l/ω₀`, s.
pub fn photon_lifetime(q_loaded: f64, wavelength_m: f64) -> Result<f64> {
    let q = require_positive("q_loaded", q_loaded)?;
    let omega = wavelength_to_angular_frequency(wavelength_m)?;
    Ok(q / omega.rad_per_s())
}

/// Build-up factor `Q_l·v_g/(ω·L/2)`, the bracket that is cubed in the
/// pair-power expression. Equals finesse/π.
pub fn field_buildup(q_loaded: f64, wavelength_m: f64, geometry: &RingGeometry) -> Result<f64> {
    let q = require_positive("q_loaded", q_loaded)?;
    let omega = wavelength_to_angular_frequency(wavelength_m)?.rad_per_s();
    Ok(q * geometry.group_velocity() / (omega * geometry.circumference() / 2.0))
}

/// Recovers `Q_i` from a fitted loaded Q and on-resonance transmittance.
///
/// Under-coupled: `2Q_l/(1 + √T_min)`; over-coupled: `2Q_l/(1 − √T_min)`;
/// critical: `2Q_l`.
pub fn intrinsic_q_from_fit(q_loaded: f64, t_min: f64, branch: CouplingBranch) -> Result<f64> {
    let q = require_positive("q_loaded", q_loaded)?;
    if branch == CouplingBranch::Critical {
        return Ok(2.0 * q);
    }
    if !(0.0..1.0).contains(&t_min) {
        return Err(Error::Domain {
            name: "t_min",
            value: t_min,
            requirement: "must lie in [0, 1) to pick a coupling branch",
        });
    }
    let root = libm::sqrt(t_min);
    Ok(match branch {
        CouplingBranch::Under => 2.0 * q / (1.0 + root),
        CouplingBranch::Over => 2.0 * q / (1.0 - root),
        CouplingBranch::Critical => unreachable!(),
    })
}
