//! Analytic singles, coincidences, accidentals and coincidence-to-accidental
//! ratio as functions of pump power.
//!
//! ```text
//! CAR = CC / AC
//! CC  = G·η_s·η_i
//! AC  = R_s·R_i·δt
//! R_s = (n_s + G)·η_s + dc_s
//! R_i = (n_i + G)·η_i + dc_i
//! ```
//!
//! `η` are collection transmittances, `n` the uncorrelated Raman photon rates
//! at the ring and `dc` detector dark counts. Raman noise uses one coefficient
//! for both channels, weighted by the thermal phonon occupancy: anti-Stokes
//! (signal, blue) by `n_th`, Stokes (idler, red) by `n_th + 1`.

use alloc::vec::Vec;

use crate::device::DeviceConfig;
use crate::error::{require_non_negative, Error, Result};
use crate::pairgen::{pair_rate, PairRate};
use crate::quantities::{DbLoss, Transmittance, BOLTZMANN, PLANCK};

/// Room temperature used when a configuration does not give one, K.
pub const DEFAULT_TEMPERATURE_K: f64 = 295.0;

/// Sources of uncorrelated counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    raman_coefficient: f64,
    temperature_k: f64,
    dark_count_signal: f64,
    dark_count_idler: f64,
}

impl NoiseParams {
    /// `raman_coefficient` is photons/s per watt of pump per channel before
    /// phonon weighting; dark counts are counts/s.
    pub fn new(raman_coefficient: f64, temperature_k: f64, dark_count_signal: f64, dark_count_idler: f64) -> Result<Self> {
        let checks = [
            ("noise.raman_coefficient", raman_coefficient),
            ("noise.dark_count_signal", dark_count_signal),
            ("noise.dark_count_idler", dark_count_idler),
        ];
        for (field, v) in checks {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, "must be finite and >= 0"));
            }
        }
        if !(temperature_k > 0.0 && temperature_k.is_finite()) {
            return Err(Error::invalid("noise.temperature", "must be finite and > 0"));
        }
        Ok(Self {
            raman_coefficient,
            temperature_k,
            dark_count_signal,
            dark_count_idler,
        })
    }

    /// Noise-free detectors and no Raman scattering.
    pub fn silent() -> Self {
        Self {
            raman_coefficient: 0.0,
            temperature_k: DEFAULT_TEMPERATURE_K,
            dark_count_signal: 0.0,
            dark_count_idler: 0.0,
        }
    }

    /// Raman coefficient `k_R`, photons/(s·W).
    pub fn raman_coefficient(&self) -> f64 {
        self.raman_coefficient
    }

    /// Phonon bath temperature, K.
    pub fn temperature(&self) -> f64 {
        self.temperature_k
    }

    /// Signal detector dark counts, counts/s.
    pub fn dark_count_signal(&self) -> f64 {
        self.dark_count_signal
    }

    /// Idler detector dark counts, counts/s.
    pub fn dark_count_idler(&self) -> f64 {
        self.dark_count_idler
    }
}

/// Losses and timing of the two detection arms.
///
/// `eta_s`/`eta_i` are total collection losses including detector efficiency;
/// `detector_qe` is kept only for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionChain {
    /// Signal collection loss.
    pub eta_s: DbLoss,
    /// Idler collection loss.
    pub eta_i: DbLoss,
    window_ps: u64,
    jitter_fwhm_ps: f64,
    detector_qe: f64,
    deadtime_ps: u64,
}

impl DetectionChain {
    /// `jitter_fwhm_ps` is per detector; `deadtime_ps` is non-paralyzable
    /// and only used by the Monte Carlo simulator.
    pub fn new(
        eta_s: DbLoss,
        eta_i: DbLoss,
        window_ps: u64,
        jitter_fwhm_ps: f64,
        detector_qe: f64,
        deadtime_ps: u64,
    ) -> Result<Self> {
        if window_ps == 0 {
            return Err(Error::invalid("detection.window", "must be > 0"));
        }
        if !(jitter_fwhm_ps >= 0.0 && jitter_fwhm_ps.is_finite()) {
            return Err(Error::invalid("detection.jitter_fwhm", "must be finite and >= 0"));
        }
        if !(detector_qe > 0.0 && detector_qe <= 1.0) {
            return Err(Error::invalid("detection.detector_qe", "must lie in (0, 1]"));
        }
        Ok(Self {
            eta_s,
            eta_i,
            window_ps,
            jitter_fwhm_ps,
            detector_qe,
            deadtime_ps,
        })
    }

    /// Coincidence window δt in integer picoseconds.
    pub fn window_ps(&self) -> u64 {
        self.window_ps
    }

    /// Coincidence window δt, s.
    pub fn window_s(&self) -> f64 {
        self.window_ps as f64 * 1e-12
    }

    /// Per-detector Gaussian timing jitter, FWHM in ps.
    pub fn jitter_fwhm_ps(&self) -> f64 {
        self.jitter_fwhm_ps
    }

    /// Detector quantum efficiency (already included in the losses).
    pub fn detector_qe(&self) -> f64 {
        self.detector_qe
    }

    /// Non-paralyzable dead time, ps.
    pub fn deadtime_ps(&self) -> u64 {
        self.deadtime_ps
    }

    /// Signal collection transmittance.
    pub fn signal_transmittance(&self) -> Transmittance {
        self.eta_s.transmittance()
    }

    /// Idler collection transmittance.
    pub fn idler_transmittance(&self) -> Transmittance {
        self.eta_i.transmittance()
    }
}

/// Uncorrelated photon rates at the ring, photons/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearNoise {
    /// `n_s`, anti-Stokes side.
    pub signal: f64,
    /// `n_i`, Stokes side.
    pub idler: f64,
}

/// Detected singles, counts/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singles {
    /// `R_s`.
    pub signal: f64,
    /// `R_i`.
    pub idler: f64,
}

/// True and accidental coincidence rates, counts/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coincidences {
    /// `CC = G·η_s·η_i`.
    pub cc: f64,
    /// `AC = R_s·R_i·δt`.
    pub ac: f64,
}

/// Coincidence-to-accidental ratio with explicit sentinels for `AC = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Car {
    /// `CC/AC` with `AC > 0`.
    Finite(f64),
    /// `CC > 0` with no accidentals.
    Infinite,
    /// Neither coincidences nor accidentals.
    Undefined,
}

impl Car {
    /// As a float: `+inf` and `NaN` for the sentinels.
    pub fn value(self) -> f64 {
        match self {
            Car::Finite(v) => v,
            Car::Infinite => f64::INFINITY,
            Car::Undefined => f64::NAN,
        }
    }
}

/// One point of the analytic power sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarPoint {
    /// Bus pump power, W.
    pub pump_power: f64,
    /// Generated pairs.
    pub pairs: PairRate,
    /// Raman photons at the ring.
    pub noise: LinearNoise,
    /// Detected singles.
    pub singles: Singles,
    /// True and accidental coincidences.
    pub coincidences: Coincidences,
    /// `CC/AC`.
    pub car: Car,
}

/// Bose–Einstein occupancy `1/(exp(hν/k_BT) − 1)`.
pub fn thermal_occupancy(detuning_hz: f64, temperature_k: f64) -> Result<f64> {
    let nu = crate::error::require_positive("detuning", detuning_hz)?;
    let t = crate::error::require_positive("temperature", temperature_k)?;
    // expm1 overflows to +inf as T → 0⁺, giving 0 occupancy
    Ok(1.0 / libm::expm1(PLANCK * nu / (BOLTZMANN * t)))
}

/// Raman photon rates at the ring: `n_s = k_R·P·n_th`, `n_i = k_R·P·(n_th + 1)`.
pub fn raman_noise_rates(raman_coefficient: f64, pump_w: f64, detuning_hz: f64, temperature_k: f64) -> Result<LinearNoise> {
    let k = require_non_negative("raman_coefficient", raman_coefficient)?;
    let p = require_non_negative("pump_power", pump_w)?;
    let n_th = thermal_occupancy(detuning_hz, temperature_k)?;
    let scale = k * p;
    Ok(LinearNoise {
        signal: scale * n_th,
        idler: scale * (n_th + 1.0),
    })
}

/// Detected singles `R = (n + G)·η + dc` for both arms.
pub fn singles_rates(pair_rate: f64, noise_rates: LinearNoise, noise: &NoiseParams, chain: &DetectionChain) -> Result<Singles> {
    let g = require_non_negative("pair_rate", pair_rate)?;
    let n_s = require_non_negative("noise_signal", noise_rates.signal)?;
    let n_i = require_non_negative("noise_idler", noise_rates.idler)?;
    let eta_s = chain.signal_transmittance().value();
    let eta_i = chain.idler_transmittance().value();
    Ok(Singles {
        signal: (n_s + g) * eta_s + noise.dark_count_signal(),
        idler: (n_i + g) * eta_i + noise.dark_count_idler(),
    })
}

/// `CC = G·η_s·η_i` and `AC = R_s·R_i·δt`.
pub fn coincidence_rates(pair_rate: f64, singles: Singles, chain: &DetectionChain) -> Result<Coincidences> {
    let g = require_non_negative("pair_rate", pair_rate)?;
    let r_s = require_non_negative("singles_signal", singles.signal)?;
    let r_i = require_non_negative("singles_idler", singles.idler)?;
    Ok(Coincidences {
        cc: g * chain.signal_transmittance().value() * chain.idler_transmittance().value(),
        ac: r_s * r_i * chain.window_s(),
    })
}

/// `CC/AC`, never dividing by zero.
pub fn car(cc: f64, ac: f64) -> Car {
    if !(cc >= 0.0 && ac >= 0.0) {
        return Car::Undefined;
    }
    if ac > 0.0 {
        Car::Finite(cc / ac)
    } else if cc > 0.0 {
        Car::Infinite
    } else {
        Car::Undefined
    }
}

/// The full analytic chain at one pump power.
pub fn car_point(device: &DeviceConfig, pump_w: f64) -> Result<CarPoint> {
    let pairs = pair_rate(device, pump_w)?;
    let noise = if device.noise.raman_coefficient() == 0.0 {
        LinearNoise::default()
    } else {
        raman_noise_rates(
            device.noise.raman_coefficient(),
            pump_w,
            device.raman_detuning_hz(),
            device.noise.temperature(),
        )?
    };
    let singles = singles_rates(pairs.generated_rate, noise, &device.noise, &device.chain)?;
    let coincidences = coincidence_rates(pairs.generated_rate, singles, &device.chain)?;
    Ok(CarPoint {
        pump_power: pump_w,
        pairs,
        noise,
        singles,
        coincidences,
        car: car(coincidences.cc, coincidences.ac),
    })
}

/// Analytic sweep over sorted, non-negative pump powers (W).
pub fn car_curve(device: &DeviceConfig, powers: &[f64]) -> Result<Vec<CarPoint>> {
    if let Some(i) = powers.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("powers", alloc::format!("not sorted at index {}", i + 1)));
    }
    powers.iter().map(|&p| car_point(device, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::tests::paper_device;
    use crate::quantities::transmittance_to_db_loss;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn chain(eta_s: f64, eta_i: f64, window_ps: u64) -> DetectionChain {
        DetectionChain::new(DbLoss::new(eta_s).unwrap(), DbLoss::new(eta_i).unwrap(), window_ps, 0.0, 1.0, 0).unwrap()
    }

    fn quiet_device() -> DeviceConfig {
        let mut d = paper_device();
        d.noise = NoiseParams::silent();
        d
    }

    #[test]
    fn occupancy_examples() {
        assert!(rel(thermal_occupancy(3.652e12, 295.0).unwrap(), 1.232_355_234_483_523_7) < 1e-12);
        assert_eq!(thermal_occupancy(3.652e12, 1e-9).unwrap(), 0.0);
        let t = PLANCK * 1e12 / (BOLTZMANN * core::f64::consts::LN_2);
        assert!((thermal_occupancy(1e12, t).unwrap() - 1.0).abs() < 1e-12);
        assert!(thermal_occupancy(0.0, 295.0).is_err());
        assert!(thermal_occupancy(1e12, 0.0).is_err());
    }

    #[test]
    fn raman_examples() {
        let n_th = thermal_occupancy(3.652e12, 295.0).unwrap();
        let r = raman_noise_rates(1e9, 1e-3, 3.652e12, 295.0).unwrap();
        assert!(rel(r.signal, 1e6 * n_th) < 1e-14);
        assert!(rel(r.idler, 1e6 * (n_th + 1.0)) < 1e-14);
        assert!(rel(r.signal, 1.232_355e6) < 1e-6);
        let zero = raman_noise_rates(1e9, 0.0, 3.652e12, 295.0).unwrap();
        assert_eq!((zero.signal, zero.idler), (0.0, 0.0));
        assert!(raman_noise_rates(-1.0, 1e-3, 1e12, 295.0).is_err());
    }

    #[test]
    fn singles_examples() {
        let c = chain(16.4, 24.1, 1152);
        let dark = NoiseParams::new(0.0, 295.0, 250.0, 250.0).unwrap();
        let s = singles_rates(1e6, LinearNoise::default(), &NoiseParams::silent(), &c).unwrap();
        assert!(rel(s.signal, 22_908.676_527_677_73) < 1e-12);
        let s = singles_rates(0.0, LinearNoise::default(), &dark, &c).unwrap();
        assert_eq!(s.signal, 250.0);
        let noisy = LinearNoise { signal: 2e6, idler: 0.0 };
        let s = singles_rates(1e6, noisy, &dark, &c).unwrap();
        assert!(rel(s.signal, 68_976.029_583_033_19) < 1e-12);
        assert!(singles_rates(-1.0, noisy, &dark, &c).is_err());
    }

    #[test]
    fn coincidence_examples() {
        let c = chain(16.4, 24.1, 1152);
        let singles = Singles { signal: 22_910.0, idler: 3_890.0 };
        let r = coincidence_rates(1.122e6, singles, &c).unwrap();
        assert!(rel(r.cc, 99.998_355_258_606_25) < 1e-12);
        assert!(rel(r.ac, 0.102_666_124_8) < 1e-12);
        assert_eq!(coincidence_rates(0.0, singles, &c).unwrap().cc, 0.0);
    }

    #[test]
    fn car_examples() {
        assert!(rel(car(100.0, 0.1027).value(), 973.709_834_469_328) < 1e-12);
        assert_eq!(car(0.0, 3.0), Car::Finite(0.0));
        assert_eq!(car(1.0, 0.0), Car::Infinite);
        assert_eq!(car(0.0, 0.0), Car::Undefined);
        assert!(car(0.0, 0.0).value().is_nan());
        // noiseless limit 1/(G·δt)
        let c = chain(16.4, 24.1, 1152);
        let g = 1e6;
        let s = singles_rates(g, LinearNoise::default(), &NoiseParams::silent(), &c).unwrap();
        let r = coincidence_rates(g, s, &c).unwrap();
        assert!(rel(car(r.cc, r.ac).value(), 868.055_555_555_555_6) < 1e-12);
    }

    #[test]
    fn curve_examples() {
        let d = paper_device();
        assert!(car_curve(&d, &[]).unwrap().is_empty());
        assert!(car_curve(&d, &[2e-3, 1e-3]).is_err());
        assert!(car_curve(&d, &[-1e-3]).is_err());

        let q = quiet_device();
        let p = car_curve(&q, &[1e-3]).unwrap();
        let expected = 1.0 / (p[0].pairs.generated_rate * q.chain.window_s());
        assert!(rel(p[0].car.value(), expected) < 1e-10);

        // zero pump: no pairs, only dark counts
        let p0 = car_point(&d, 0.0).unwrap();
        assert_eq!(p0.car, Car::Finite(0.0));
    }

    #[test]
    fn reference_car_falls_at_high_power() {
        let d = paper_device();
        let powers: Vec<f64> = (1..=40).map(|k| k as f64 * 0.05e-3).collect();
        let curve = car_curve(&d, &powers).unwrap();
        let tail: Vec<f64> = curve[30..].iter().map(|p| p.car.value()).collect();
        assert!(tail.windows(2).all(|w| w[1] < w[0]));
        // dark counts depress CAR at the lowest power
        assert!(curve[0].car.value() < curve[5].car.value());
    }

    #[test]
    fn singles_curvature_positive() {
        let d = paper_device();
        let (p, h) = (1e-3, 1e-4);
        let r = |x| car_point(&d, x).unwrap().singles.signal;
        let second = (r(p + h) - 2.0 * r(p) + r(p - h)) / (h * h);
        let g = |x| car_point(&d, x).unwrap().pairs.generated_rate;
        let g2 = (g(p + h) - 2.0 * g(p) + g(p - h)) / (h * h);
        assert!(second > 0.0);
        assert!(rel(second, d.chain.signal_transmittance().value() * g2) < 1e-4);

        // with the pair term removed the singles are affine in power
        let mut q = d.clone();
        q.nonlinear = crate::pairgen::NonlinearParams::new(1e-30, 785e-9, 0.35e-12).unwrap();
        let r = |x| car_point(&q, x).unwrap().singles.signal;
        let second = (r(p + h) - 2.0 * r(p) + r(p - h)) / (h * h);
        assert!(second.abs() < 1e-6 * r(p) / (h * h));
    }

    proptest! {
        #[test]
        fn detailed_balance(k in 1e3f64..1e12, p in 1e-6f64..1e-1, nu in 1e10f64..2e13, t in 1.0f64..1000.0) {
            let r = raman_noise_rates(k, p, nu, t).unwrap();
            let boltzmann = libm::exp(PLANCK * nu / (BOLTZMANN * t));
            prop_assert!(rel(r.idler / r.signal, boltzmann) <= 1e-9);
        }

        #[test]
        fn noiseless_collapse(p in 1e-5f64..5e-3) {
            let q = quiet_device();
            let pt = car_point(&q, p).unwrap();
            let prod = pt.car.value() * pt.pairs.generated_rate * q.chain.window_s();
            prop_assert!((prod - 1.0).abs() <= 1e-10);
            // substituting CC into AC: AC = CC·G·δt with no noise
            prop_assert!(pt.coincidences.ac >= pt.coincidences.cc * pt.pairs.generated_rate * q.chain.window_s() * (1.0 - 1e-12));
        }

        #[test]
        fn car_invariant_under_loss_exchange(a in 0.2f64..5.0, p in 1e-5f64..3e-3) {
            let mut d = paper_device();
            d.noise = NoiseParams::new(2.5e9, 295.0, 0.0, 0.0).unwrap();
            let ts = d.chain.signal_transmittance().value() * a;
            let ti = d.chain.idler_transmittance().value() / a;
            prop_assume!(ts <= 1.0);
            let mut e = d.clone();
            e.chain.eta_s = transmittance_to_db_loss(Transmittance::new(ts).unwrap()).unwrap();
            e.chain.eta_i = transmittance_to_db_loss(Transmittance::new(ti).unwrap()).unwrap();
            let c0 = car_point(&d, p).unwrap().car.value();
            let c1 = car_point(&e, p).unwrap().car.value();
            prop_assert!(rel(c1, c0) <= 1e-12);
        }
    }
}
