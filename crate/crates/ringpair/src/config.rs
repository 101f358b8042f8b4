//! JSON device configuration.
//!
//! Field names carry their unit as a suffix. Lengths are given in the unit
//! that reads naturally for the quantity (µm for the ring, nm for
//! wavelengths); everything is converted to SI on the way in.
//!
//! ```json
//! {
//!   "geometry":    { "radius_um": 19.0, "group_index": 2.0, "effective_area_um2": 0.35 },
//!   "resonator":   { "q_intrinsic": 320000.0, "q_coupling": 320000.0, "extinction_db": 23.0 },
//!   "nonlinear":   { "n2_m2_per_w": 2.4e-19, "pump_wavelength_nm": 785.0 },
//!   "wavelengths": { "signal_nm": 777.5, "idler_nm": 792.5 },
//!   "noise":       { "raman_coefficient_per_w_s": 2.5e9, "temperature_k": 295.0,
//!                    "dark_count_signal_hz": 250.0, "dark_count_idler_hz": 250.0 },
//!   "detection":   { "eta_s_db": 16.4, "eta_i_db": 24.1, "window_ps": 1152,
//!                    "jitter_fwhm_ps": 350.0, "detector_qe": 0.65, "deadtime_ps": 0 },
//!   "metadata": "free text"
//! }
//! ```
//!
//! `q_coupling` may be `null` for an uncoupled ring. The resonance sits at
//! the pump wavelength.

use std::fmt;
use std::path::Path;

use ringpair_core::device::ENERGY_CONSERVATION_WARNING;
use ringpair_core::noisemodel::{DetectionChain, NoiseParams};
use ringpair_core::pairgen::NonlinearParams;
use ringpair_core::quantities::{transmittance_to_db_loss, wavelength_to_frequency, DbLoss};
use ringpair_core::resonator::{ResonatorParams, RingGeometry};
use ringpair_core::DeviceConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::write_json;

/// The configuration of the reference device shipped with the crate.
pub const PAPER_DEVICE_JSON: &str = include_str!("../data/paper_device.json");

/// Ring geometry section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub radius_um: f64,
    pub group_index: f64,
    pub effective_area_um2: f64,
}

/// Resonance section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resonator {
    pub q_intrinsic: f64,
    pub q_coupling: Option<f64>,
    pub extinction_db: f64,
}

/// Kerr nonlinearity section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nonlinear {
    pub n2_m2_per_w: f64,
    pub pump_wavelength_nm: f64,
}

/// Pair wavelengths section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Wavelengths {
    pub signal_nm: f64,
    pub idler_nm: f64,
}

/// Noise section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    pub raman_coefficient_per_w_s: f64,
    pub temperature_k: f64,
    pub dark_count_signal_hz: f64,
    pub dark_count_idler_hz: f64,
}

/// Detection-chain section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detection {
    pub eta_s_db: f64,
    pub eta_i_db: f64,
    pub window_ps: u64,
    pub jitter_fwhm_ps: f64,
    pub detector_qe: f64,
    #[serde(default)]
    pub deadtime_ps: u64,
}

/// A configuration file as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub geometry: Geometry,
    pub resonator: Resonator,
    pub nonlinear: Nonlinear,
    pub wavelengths: Wavelengths,
    pub noise: Noise,
    pub detection: Detection,
    #[serde(default)]
    pub metadata: String,
}

/// A validation failure located by its dotted path in the document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for FieldError {}

/// Document path of a field named by the core crate.
fn document_path(core_field: &str) -> Option<&'static str> {
    Some(match core_field {
        "geometry.radius" => "geometry.radius_um",
        "geometry.group_index" => "geometry.group_index",
        "geometry.effective_area" => "geometry.effective_area_um2",
        "resonator.resonance_frequency" => "nonlinear.pump_wavelength_nm",
        "resonator.q_intrinsic" => "resonator.q_intrinsic",
        "resonator.q_coupling" => "resonator.q_coupling",
        "nonlinear.pump_wavelength" => "nonlinear.pump_wavelength_nm",
        "nonlinear.gamma" => "nonlinear.n2_m2_per_w",
        "wavelengths" => "wavelengths",
        "wavelengths.signal" => "wavelengths.signal_nm",
        "wavelengths.idler" => "wavelengths.idler_nm",
        "noise.raman_coefficient" => "noise.raman_coefficient_per_w_s",
        "noise.temperature" => "noise.temperature_k",
        "noise.dark_count_signal" => "noise.dark_count_signal_hz",
        "noise.dark_count_idler" => "noise.dark_count_idler_hz",
        "detection.window" => "detection.window_ps",
        "detection.jitter_fwhm" => "detection.jitter_fwhm_ps",
        "detection.detector_qe" => "detection.detector_qe",
        _ => return None,
    })
}

/// Locates a core error in the document, falling back to `fallback`.
fn locate(fallback: &str) -> impl Fn(ringpair_core::Error) -> FieldError + '_ {
    move |e| {
        let field = match &e {
            ringpair_core::Error::Invalid { field, .. } => document_path(field).unwrap_or(fallback),
            _ => fallback,
        };
        let reason = match e {
            ringpair_core::Error::Invalid { reason, .. } => reason,
            other => other.to_string(),
        };
        FieldError { field: field.to_string(), reason }
    }
}

impl ConfigDocument {
    /// Converts to SI and runs every component and cross-field check.
    pub fn to_device(&self) -> Result<DeviceConfig, FieldError> {
        let g = &self.geometry;
        let geometry = RingGeometry::new(g.radius_um / 1e6, g.group_index, g.effective_area_um2 / 1e12)
            .map_err(locate("geometry"))?;

        let pump_m = self.nonlinear.pump_wavelength_nm / 1e9;
        let nonlinear = NonlinearParams::new(self.nonlinear.n2_m2_per_w, pump_m, geometry.effective_area())
            .map_err(locate("nonlinear.n2_m2_per_w"))?;

        let r = &self.resonator;
        let extinction = DbLoss::new(r.extinction_db).map_err(locate("resonator.extinction_db"))?;
        let resonance = wavelength_to_frequency(pump_m).map_err(locate("nonlinear.pump_wavelength_nm"))?;
        let resonator = ResonatorParams::new(
            resonance,
            r.q_intrinsic,
            r.q_coupling.unwrap_or(f64::INFINITY),
            extinction.transmittance(),
        )
        .map_err(locate("resonator"))?;

        let n = &self.noise;
        let noise = NoiseParams::new(
            n.raman_coefficient_per_w_s,
            n.temperature_k,
            n.dark_count_signal_hz,
            n.dark_count_idler_hz,
        )
        .map_err(locate("noise"))?;

        let d = &self.detection;
        let eta_s = DbLoss::new(d.eta_s_db).map_err(locate("detection.eta_s_db"))?;
        let eta_i = DbLoss::new(d.eta_i_db).map_err(locate("detection.eta_i_db"))?;
        let chain = DetectionChain::new(eta_s, eta_i, d.window_ps, d.jitter_fwhm_ps, d.detector_qe, d.deadtime_ps)
            .map_err(locate("detection"))?;

        DeviceConfig::new(
            geometry,
            resonator,
            nonlinear,
            self.wavelengths.signal_nm / 1e9,
            self.wavelengths.idler_nm / 1e9,
            noise,
            chain,
            self.metadata.clone(),
        )
        .map_err(locate("wavelengths"))
    }

    /// Document describing `device`. Fails only when the extinction is
    /// perfect, which has no finite dB value.
    pub fn from_device(device: &DeviceConfig) -> Result<Self, FieldError> {
        let extinction = transmittance_to_db_loss(device.resonator.extinction()).map_err(locate("resonator.extinction_db"))?;
        let q_c = device.resonator.q_coupling();
        Ok(Self {
            geometry: Geometry {
                radius_um: device.geometry.radius() * 1e6,
                group_index: device.geometry.group_index(),
                effective_area_um2: device.geometry.effective_area() * 1e12,
            },
            resonator: Resonator {
                q_intrinsic: device.resonator.q_intrinsic(),
                q_coupling: q_c.is_finite().then_some(q_c),
                extinction_db: extinction.db(),
            },
            nonlinear: Nonlinear {
                n2_m2_per_w: device.nonlinear.n2(),
                pump_wavelength_nm: device.nonlinear.pump_wavelength() * 1e9,
            },
            wavelengths: Wavelengths {
                signal_nm: device.signal_wavelength_m * 1e9,
                idler_nm: device.idler_wavelength_m * 1e9,
            },
            noise: Noise {
                raman_coefficient_per_w_s: device.noise.raman_coefficient(),
                temperature_k: device.noise.temperature(),
                dark_count_signal_hz: device.noise.dark_count_signal(),
                dark_count_idler_hz: device.noise.dark_count_idler(),
            },
            detection: Detection {
                eta_s_db: device.chain.eta_s.db(),
                eta_i_db: device.chain.eta_i.db(),
                window_ps: device.chain.window_ps(),
                jitter_fwhm_ps: device.chain.jitter_fwhm_ps(),
                detector_qe: device.chain.detector_qe(),
                deadtime_ps: device.chain.deadtime_ps(),
            },
            metadata: device.metadata.clone(),
        })
    }

    /// Parses a document from JSON text. Errors carry the path of the
    /// offending field.
    pub fn from_json(text: &str) -> Result<Self, FieldError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let parent = e.path().to_string();
            let inner = e.into_inner();
            let message = inner.to_string();
            // a missing field is reported at its parent; point at the field
            let field = match message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
                Some(name) if parent == "." => name.to_string(),
                Some(name) => format!("{parent}.{name}"),
                None => parent,
            };
            FieldError { field, reason: message }
        })
    }
}

/// Reads the raw bytes of a configuration file.
pub fn read_config_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Reads and parses a configuration document without validating it.
pub fn load_document(path: &Path) -> Result<ConfigDocument> {
    let bytes = read_config_bytes(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Config {
        path: path.into(),
        field: ".".into(),
        reason: e.to_string(),
    })?;
    ConfigDocument::from_json(text).map_err(|e| config_error(path, e))
}

/// Loads and validates a device configuration.
pub fn load_device_config(path: &Path) -> Result<DeviceConfig> {
    load_document(path)?.to_device().map_err(|e| config_error(path, e))
}

/// Writes `document` atomically as pretty JSON.
pub fn save_device_config(path: &Path, document: &ConfigDocument) -> Result<()> {
    write_json(path, document)
}

/// The bundled reference device.
pub fn paper_device() -> DeviceConfig {
    ConfigDocument::from_json(PAPER_DEVICE_JSON)
        .and_then(|d| d.to_device())
        .expect("bundled configuration is valid")
}

/// Non-fatal findings about a valid configuration.
pub fn config_warnings(device: &DeviceConfig) -> Vec<String> {
    let mut out = Vec::new();
    let mismatch = device.energy_mismatch();
    if mismatch > ENERGY_CONSERVATION_WARNING {
        out.push(format!(
            "wavelengths: energy conservation holds only to {mismatch:.2e} relative (> {ENERGY_CONSERVATION_WARNING:e})"
        ));
    }
    out
}

fn config_error(path: &Path, e: FieldError) -> Error {
    Error::Config {
        path: path.into(),
        field: e.field,
        reason: e.reason,
    }
}
