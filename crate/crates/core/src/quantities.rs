//! Physical constants and the handful of unit conversions the model needs.

use core::f64::consts::{LN_10, PI};

use crate::error::{require_positive, Error, Result};

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J·s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Attenuation in decibels; positive means loss.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct DbLoss(f64);

impl DbLoss {
    /// Builds a loss, rejecting non-finite and negative values.
    pub fn new(db: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(Error::invalid("db_loss", "must be finite"));
        }
        if db < 0.0 {
            return Err(Error::invalid("db_loss", "physical loss must be >= 0 dB"));
        }
        Ok(Self(db))
    }

    /// Value in dB.
    pub fn db(self) -> f64 {
        self.0
    }

    /// Power fraction transmitted through this loss.
    pub fn transmittance(self) -> Transmittance {
        db_loss_to_transmittance(self)
    }
}

impl core::ops::Add for DbLoss {
    type Output = DbLoss;

    fn add(self, rhs: DbLoss) -> DbLoss {
        DbLoss(self.0 + rhs.0)
    }
}

/// Dimensionless power fraction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Transmittance(f64);

impl Transmittance {
    /// Lossless transmission.
    pub const UNITY: Transmittance = Transmittance(1.0);

    /// Builds a transmittance; rejects values outside `[0, 1]`.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::Domain {
                name: "transmittance",
                value,
                requirement: "must be >= 0",
            });
        }
        if value > 1.0 {
            return Err(Error::invalid("transmittance", "must be <= 1"));
        }
        Ok(Self(value))
    }

    /// The power fraction.
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Angular frequency in rad/s, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    /// Builds an angular frequency; must be finite and positive.
    pub fn new(rad_per_s: f64) -> Result<Self> {
        require_positive("angular_frequency", rad_per_s).map(Self)
    }

    /// Value in rad/s.
    pub fn rad_per_s(self) -> f64 {
        self.0
    }

    /// Ordinary frequency in Hz.
    pub fn hz(self) -> f64 {
        self.0 / (2.0 * PI)
    }
}

/// `10^(-loss/10)`.
pub fn db_loss_to_transmittance(loss: DbLoss) -> Transmittance {
    // exp form keeps the composition property tight: T(a+b) = T(a)T(b).
    Transmittance(libm::exp(-loss.0 * LN_10 / 10.0))
}

/// `-10·log10(t)`; zero transmittance has no finite loss.
pub fn transmittance_to_db_loss(t: Transmittance) -> Result<DbLoss> {
    if t.0 <= 0.0 {
        return Err(Error::Domain {
            name: "transmittance",
            value: t.0,
            requirement: "must be > 0 to express as dB",
        });
    }
    // -0.0 for t = 1 is normalised to +0.0.
    Ok(DbLoss((-10.0 * libm::log10(t.0)).max(0.0)))
}

/// `2πc/λ` for a vacuum wavelength in metres.
pub fn wavelength_to_angular_frequency(wavelength_m: f64) -> Result<AngularFrequency> {
    let lambda = require_positive("wavelength", wavelength_m)?;
    AngularFrequency::new(2.0 * PI * SPEED_OF_LIGHT / lambda)
}

/// `c/λ` in Hz for a vacuum wavelength in metres.
pub fn wavelength_to_frequency(wavelength_m: f64) -> Result<f64> {
    let lambda = require_positive("wavelength", wavelength_m)?;
    Ok(SPEED_OF_LIGHT / lambda)
}
