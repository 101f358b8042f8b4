//! Seeded time-tag simulator and coincidence counter.
//!
//! The simulator draws detection events for the two arms of the source:
//!
//! * pairs arrive as a Poisson process of rate `G`; each photon of a pair
//!   leaves the cavity after its own exponential delay (mean = photon
//!   lifetime) and survives its arm with probability `η`;
//! * Raman photons and dark counts are independent Poisson processes at their
//!   detected rates;
//! * every detection is smeared by Gaussian jitter and rounded to 1 ps.
//!
//! Per-photon thinning of a Poisson process is simulated by drawing only the
//! pairs with at least one surviving photon (rate `G·(1 − (1−η_s)(1−η_i))`)
//! and marking which photons survive; the resulting streams have the same law
//! as thinning every generated pair, at a fraction of the cost.
//!
//! Randomness comes from ChaCha20 seeded with a 64-bit seed; replicate `k`
//! uses ChaCha stream `k` of the same seed.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, Normal};

use crate::device::DeviceConfig;
use crate::error::{Error, Result};
use crate::noisemodel::car_point;

/// Identifier of the generator recorded in run manifests.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9, seed_from_u64, stream = replicate index)";

/// Largest time a tag may carry, ps (about 53 days).
pub const MAX_TIME_PS: u64 = 1 << 62;

const PS_PER_S: f64 = 1e12;
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Detector arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    /// Blue-detuned photon, file code 0.
    Signal,
    /// Red-detuned photon, file code 1.
    Idler,
}

impl Channel {
    /// Numeric code used in tag files.
    pub fn code(self) -> u8 {
        match self {
            Channel::Signal => 0,
            Channel::Idler => 1,
        }
    }

    /// Inverse of [`Channel::code`].
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Channel::Signal),
            1 => Some(Channel::Idler),
            _ => None,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Signal => "signal",
            Channel::Idler => "idler",
        })
    }
}

/// One detection event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeTag {
    /// Arm that fired.
    pub channel: Channel,
    /// Detection time, ps.
    pub time_ps: u64,
}

/// Time-sorted detection times of both arms, ps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TagStreams {
    /// Signal arm.
    pub signal: Vec<u64>,
    /// Idler arm.
    pub idler: Vec<u64>,
}

impl TagStreams {
    /// Splits interleaved tags by channel, requiring each channel to be
    /// non-decreasing in time.
    pub fn from_tags(tags: &[TimeTag]) -> Result<Self> {
        let mut streams = TagStreams::default();
        for tag in tags {
            match tag.channel {
                Channel::Signal => streams.signal.push(tag.time_ps),
                Channel::Idler => streams.idler.push(tag.time_ps),
            }
        }
        streams.check_sorted()?;
        Ok(streams)
    }

    /// Merges both arms into one time-ordered list (signal first on ties).
    pub fn to_tags(&self) -> Vec<TimeTag> {
        let mut out = Vec::with_capacity(self.signal.len() + self.idler.len());
        let (mut i, mut j) = (0, 0);
        while i < self.signal.len() || j < self.idler.len() {
            let take_signal = j == self.idler.len() || (i < self.signal.len() && self.signal[i] <= self.idler[j]);
            if take_signal {
                out.push(TimeTag { channel: Channel::Signal, time_ps: self.signal[i] });
                i += 1;
            } else {
                out.push(TimeTag { channel: Channel::Idler, time_ps: self.idler[j] });
                j += 1;
            }
        }
        out
    }

    /// Fails with [`Error::Unsorted`] on the first out-of-order tag, or with
    /// [`Error::Invalid`] if a time exceeds [`MAX_TIME_PS`].
    pub fn check_sorted(&self) -> Result<()> {
        for (channel, times) in [(Channel::Signal, &self.signal), (Channel::Idler, &self.idler)] {
            if let Some(index) = times.windows(2).position(|w| w[1] < w[0]) {
                return Err(Error::Unsorted { channel, index: index + 1 });
            }
            if times.last().is_some_and(|&t| t > MAX_TIME_PS) {
                return Err(Error::invalid("time_ps", "exceeds 2^62 ps"));
            }
        }
        Ok(())
    }

    /// Span from the earliest to the latest tag of either arm, ps.
    pub fn span_ps(&self) -> u64 {
        let first = self.signal.first().into_iter().chain(self.idler.first()).min();
        let last = self.signal.last().into_iter().chain(self.idler.last()).max();
        match (first, last) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }
}

/// Detected-event rates driving the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    /// Pairs generated per second, `G`.
    pub pair_rate: f64,
    /// Signal-arm survival probability `η_s`.
    pub transmittance_signal: f64,
    /// Idler-arm survival probability `η_i`.
    pub transmittance_idler: f64,
    /// Detected Raman photons in the signal arm, `n_s·η_s`, per second.
    pub noise_rate_signal: f64,
    /// Detected Raman photons in the idler arm, `n_i·η_i`, per second.
    pub noise_rate_idler: f64,
    /// Signal dark counts per second.
    pub dark_count_signal: f64,
    /// Idler dark counts per second.
    pub dark_count_idler: f64,
    /// Mean cavity escape delay of each pair photon, s.
    pub photon_lifetime_s: f64,
    /// Per-detection Gaussian jitter, FWHM in ps.
    pub jitter_fwhm_ps: f64,
    /// Non-paralyzable dead time per detector, ps.
    pub deadtime_ps: u64,
}

impl SourceModel {
    /// Rates implied by the analytic model at bus pump power `pump_w`.
    pub fn from_device(device: &DeviceConfig, pump_w: f64) -> Result<Self> {
        device.validate()?;
        let point = car_point(device, pump_w)?;
        let eta_s = device.chain.signal_transmittance().value();
        let eta_i = device.chain.idler_transmittance().value();
        let model = SourceModel {
            pair_rate: point.pairs.generated_rate,
            transmittance_signal: eta_s,
            transmittance_idler: eta_i,
            noise_rate_signal: point.noise.signal * eta_s,
            noise_rate_idler: point.noise.idler * eta_i,
            dark_count_signal: device.noise.dark_count_signal(),
            dark_count_idler: device.noise.dark_count_idler(),
            photon_lifetime_s: device.photon_lifetime(),
            jitter_fwhm_ps: device.chain.jitter_fwhm_ps(),
            deadtime_ps: device.chain.deadtime_ps(),
        };
        model.validate()?;
        Ok(model)
    }

    /// Rates non-negative and finite, transmittances in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("pair_rate", self.pair_rate),
            ("noise_rate_signal", self.noise_rate_signal),
            ("noise_rate_idler", self.noise_rate_idler),
            ("dark_count_signal", self.dark_count_signal),
            ("dark_count_idler", self.dark_count_idler),
            ("photon_lifetime", self.photon_lifetime_s),
            ("jitter_fwhm", self.jitter_fwhm_ps),
        ];
        for (field, v) in rates {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, "must be finite and >= 0"));
            }
        }
        for (field, v) in [
            ("transmittance_signal", self.transmittance_signal),
            ("transmittance_idler", self.transmittance_idler),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(field, "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Expected detected singles `(R_s, R_i)`, counts/s (ignoring dead time).
    pub fn expected_singles(&self) -> (f64, f64) {
        (
            self.pair_rate * self.transmittance_signal + self.noise_rate_signal + self.dark_count_signal,
            self.pair_rate * self.transmittance_idler + self.noise_rate_idler + self.dark_count_idler,
        )
    }
}

/// Seeded generator for replicate `stream` of `seed`.
pub fn replicate_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Simulates `duration_s` seconds of the device at pump power `pump_w`.
/// Identical `(device, pump_w, duration_s, seed)` give identical streams.
pub fn simulate_timetags(device: &DeviceConfig, pump_w: f64, duration_s: f64, seed: u64) -> Result<TagStreams> {
    let model = SourceModel::from_device(device, pump_w)?;
    simulate_source(&model, duration_s, &mut replicate_rng(seed, 0))
}

/// Simulates `duration_s` seconds of an explicit source model.
pub fn simulate_source<R: Rng + ?Sized>(model: &SourceModel, duration_s: f64, rng: &mut R) -> Result<TagStreams> {
    model.validate()?;
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(Error::invalid("duration", "must be finite and > 0"));
    }
    let duration_ps = duration_s * PS_PER_S;
    if duration_ps >= MAX_TIME_PS as f64 / 2.0 {
        return Err(Error::invalid("duration", "too long for a 2^62 ps time base"));
    }

    let jitter = if model.jitter_fwhm_ps > 0.0 {
        Some(Normal::new(0.0, model.jitter_fwhm_ps / FWHM_PER_SIGMA).expect("positive finite sigma"))
    } else {
        None
    };
    let lifetime_ps = model.photon_lifetime_s * PS_PER_S;
    let escape = if lifetime_ps > 0.0 {
        Some(Exp::new(1.0 / lifetime_ps).expect("positive finite rate"))
    } else {
        None
    };

    let mut signal = Vec::new();
    let mut idler = Vec::new();
    let detect = |out: &mut Vec<u64>, t: f64, rng: &mut R| {
        let t = match &jitter {
            Some(j) => t + j.sample(rng),
            None => t,
        };
        let rounded = libm::round(t);
        if rounded >= 0.0 {
            out.push(rounded as u64);
        }
    };

    let (p_s, p_i) = (model.transmittance_signal, model.transmittance_idler);
    let p_any = 1.0 - (1.0 - p_s) * (1.0 - p_i);
    let p_both = p_s * p_i;
    poisson_times(model.pair_rate * p_any, duration_ps, rng, |t, rng| {
        let u = rng.random::<f64>() * p_any;
        let (hit_s, hit_i) = if u < p_both {
            (true, true)
        } else if u < p_s {
            (true, false)
        } else {
            (false, true)
        };
        for (hit, out) in [(hit_s, &mut signal), (hit_i, &mut idler)] {
            if hit {
                let delay = escape.as_ref().map_or(0.0, |e| e.sample(rng));
                detect(out, t + delay, rng);
            }
        }
    });
    for (rate, channel) in [
        (model.noise_rate_signal, Channel::Signal),
        (model.noise_rate_idler, Channel::Idler),
        (model.dark_count_signal, Channel::Signal),
        (model.dark_count_idler, Channel::Idler),
    ] {
        let out = match channel {
            Channel::Signal => &mut signal,
            Channel::Idler => &mut idler,
        };
        poisson_times(rate, duration_ps, rng, |t, rng| detect(out, t, rng));
    }

    for times in [&mut signal, &mut idler] {
        times.sort_unstable();
        if model.deadtime_ps > 0 {
            apply_deadtime(times, model.deadtime_ps);
        }
    }
    Ok(TagStreams { signal, idler })
}

/// Calls `emit` for each arrival of a Poisson process of `rate_per_s` on
/// `[0, duration_ps)`.
fn poisson_times<R: Rng + ?Sized>(rate_per_s: f64, duration_ps: f64, rng: &mut R, mut emit: impl FnMut(f64, &mut R)) {
    if rate_per_s <= 0.0 {
        return;
    }
    let gap = Exp::new(rate_per_s / PS_PER_S).expect("positive finite rate");
    let mut t = gap.sample(rng);
    while t < duration_ps {
        emit(t, rng);
        t += gap.sample(rng);
    }
}

/// Non-paralyzable dead time: drops every event closer than `deadtime_ps` to
/// the last kept one.
fn apply_deadtime(times: &mut Vec<u64>, deadtime_ps: u64) {
    let mut next_free = 0u64;
    let mut first = true;
    times.retain(|&t| {
        if first || t >= next_free {
            first = false;
            next_free = t.saturating_add(deadtime_ps);
            true
        } else {
            false
        }
    });
}

/// Parameters of the coincidence analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoincidenceSettings {
    /// Full coincidence window δt; a pair counts if `2|τ| ≤ window`.
    pub window_ps: u64,
    /// Idler shift used to count accidentals; must exceed the window.
    pub accidental_offset_ps: u64,
    /// Width of the delay-histogram bins.
    pub bin_width_ps: u64,
    /// Histogram covers `τ ∈ [−range, +range)`.
    pub histogram_range_ps: u64,
    /// Acquisition time; `None` uses the span of the tags.
    pub duration_ps: Option<u64>,
}

impl CoincidenceSettings {
    /// Histogram range defaults to one full window on either side.
    pub fn new(window_ps: u64, accidental_offset_ps: u64, bin_width_ps: u64) -> Result<Self> {
        let settings = Self {
            window_ps,
            accidental_offset_ps,
            bin_width_ps,
            histogram_range_ps: window_ps,
            duration_ps: None,
        };
        settings.validate()?;
        Ok(settings)
    }

    /// Overrides the histogram half-range.
    pub fn with_range(mut self, range_ps: u64) -> Result<Self> {
        self.histogram_range_ps = range_ps;
        self.validate()?;
        Ok(self)
    }

    /// Fixes the acquisition time used to convert counts to rates.
    pub fn with_duration(mut self, duration_ps: u64) -> Self {
        self.duration_ps = Some(duration_ps);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.window_ps == 0 {
            return Err(Error::invalid("window_ps", "must be > 0"));
        }
        if self.accidental_offset_ps <= self.window_ps {
            return Err(Error::invalid("offset_ps", "accidental offset must exceed the window"));
        }
        if self.bin_width_ps == 0 {
            return Err(Error::invalid("bin_ps", "must be > 0"));
        }
        if self.histogram_range_ps == 0 || self.histogram_range_ps > MAX_TIME_PS || self.accidental_offset_ps > MAX_TIME_PS {
            return Err(Error::invalid("range_ps", "must lie in (0, 2^62]"));
        }
        Ok(())
    }
}

/// Accidental offset used when none is given: 64 windows.
pub fn default_accidental_offset(window_ps: u64) -> u64 {
    64 * window_ps
}

/// Counts per uniform bin of relative delay `τ = t_idler − t_signal`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayHistogram {
    /// Lower edge of the first bin, ps.
    pub start_ps: i64,
    /// Bin width, ps.
    pub bin_width_ps: u64,
    /// Pair counts per bin.
    pub counts: Vec<u64>,
}

impl DelayHistogram {
    /// Centre of bin `k`, ps.
    pub fn bin_center(&self, k: usize) -> f64 {
        self.start_ps as f64 + (k as f64 + 0.5) * self.bin_width_ps as f64
    }

    /// `(centre, count)` for every bin.
    pub fn iter(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.counts.iter().enumerate().map(|(k, &c)| (self.bin_center(k), c))
    }
}

/// Measured coincidences, accidentals and their ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceResult {
    /// Pairs within the window at zero offset (true + accidental).
    pub cc_count: u64,
    /// Pairs within the window with the idler shifted by the offset.
    pub ac_count: u64,
    /// `(cc − ac)/ac`: the in-window excess over accidentals, per accidental.
    pub car_estimate: f64,
    /// Poisson standard error of `car_estimate`.
    pub car_stderr: f64,
    /// Delay histogram at zero offset.
    pub histogram: DelayHistogram,
    /// Acquisition time, s.
    pub duration_s: f64,
    /// Window used, ps.
    pub window_ps: u64,
    /// Offset used, ps.
    pub accidental_offset_ps: u64,
    /// Number of signal tags.
    pub singles_signal: u64,
    /// Number of idler tags.
    pub singles_idler: u64,
}

/// Number of `(s, i)` with `2|t_i + shift − t_s| ≤ window`, by a two-pointer
/// sweep over both sorted streams.
fn count_within(signal: &[u64], idler: &[u64], shift: i64, window: i64) -> u64 {
    let half = window / 2;
    let (mut lo, mut hi, mut total) = (0usize, 0usize, 0u64);
    for &s in signal {
        let s = s as i64;
        while lo < idler.len() && idler[lo] as i64 + shift < s - half {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi < idler.len() && idler[hi] as i64 + shift <= s + half {
            hi += 1;
        }
        total += (hi - lo) as u64;
    }
    total
}

fn delay_histogram(signal: &[u64], idler: &[u64], range: i64, bin: u64) -> DelayHistogram {
    let n_bins = (2 * range as u64).div_ceil(bin) as usize;
    let mut counts = alloc::vec![0u64; n_bins];
    let lo_edge = -range;
    let hi_edge = lo_edge + (n_bins as u64 * bin) as i64;
    let (mut lo, mut hi) = (0usize, 0usize);
    for &s in signal {
        let s = s as i64;
        while lo < idler.len() && (idler[lo] as i64) - s < lo_edge {
            lo += 1;
        }
        hi = hi.max(lo);
        while hi < idler.len() && (idler[hi] as i64) - s < hi_edge {
            hi += 1;
        }
        for &t in &idler[lo..hi] {
            let k = ((t as i64 - s - lo_edge) as u64 / bin) as usize;
            counts[k] += 1;
        }
    }
    DelayHistogram {
        start_ps: lo_edge,
        bin_width_ps: bin,
        counts,
    }
}

/// Counts coincidences and offset-window accidentals between two sorted
/// streams and histograms their relative delays.
pub fn count_coincidences(signal: &[u64], idler: &[u64], settings: &CoincidenceSettings) -> Result<CoincidenceResult> {
    settings.validate()?;
    let streams = TagStreams { signal: signal.to_vec(), idler: idler.to_vec() };
    streams.check_sorted()?;
    let window = settings.window_ps as i64;
    let cc = count_within(signal, idler, 0, window);
    let ac = count_within(signal, idler, settings.accidental_offset_ps as i64, window);
    let histogram = delay_histogram(signal, idler, settings.histogram_range_ps as i64, settings.bin_width_ps);
    let duration_ps = settings.duration_ps.unwrap_or_else(|| streams.span_ps());
    let (car_estimate, car_stderr) = car_from_counts(cc, ac);
    Ok(CoincidenceResult {
        cc_count: cc,
        ac_count: ac,
        car_estimate,
        car_stderr,
        histogram,
        duration_s: duration_ps as f64 / PS_PER_S,
        window_ps: settings.window_ps,
        accidental_offset_ps: settings.accidental_offset_ps,
        singles_signal: signal.len() as u64,
        singles_idler: idler.len() as u64,
    })
}

/// `(cc − ac)/ac` and its delta-method Poisson error
/// `(cc/ac)·sqrt(1/cc + 1/ac)`. Infinite/NaN when `ac = 0`.
pub fn car_from_counts(cc: u64, ac: u64) -> (f64, f64) {
    if ac == 0 {
        let est = if cc > 0 { f64::INFINITY } else { f64::NAN };
        return (est, f64::NAN);
    }
    let (c, a) = (cc as f64, ac as f64);
    let ratio = c / a;
    let err = if cc == 0 { 1.0 / a } else { ratio * libm::sqrt(1.0 / c + 1.0 / a) };
    (ratio - 1.0, err)
}

/// Mean and standard error of replicated CAR estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct CarEstimate {
    /// Sample mean.
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub stderr: f64,
    /// Individual replicate estimates, in replicate order.
    pub replicates: Vec<f64>,
}

impl CarEstimate {
    /// Summarizes at least two finite replicate values.
    pub fn from_replicates(replicates: Vec<f64>) -> Result<Self> {
        if replicates.len() < 2 {
            return Err(Error::invalid("replicates", "need at least 2"));
        }
        if replicates.iter().any(|v| !v.is_finite()) {
            return Err(Error::InsufficientCounts("a replicate recorded no accidentals; increase the duration"));
        }
        let n = replicates.len() as f64;
        let mean = replicates.iter().sum::<f64>() / n;
        let var = replicates.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        Ok(Self {
            mean,
            stderr: libm::sqrt(var / n),
            replicates,
        })
    }
}

/// One replicate: simulate on stream `replicate` of `seed`, then count.
pub fn replicate_car(model: &SourceModel, settings: &CoincidenceSettings, duration_s: f64, seed: u64, replicate: u64) -> Result<CoincidenceResult> {
    let streams = simulate_source(model, duration_s, &mut replicate_rng(seed, replicate))?;
    let settings = settings.with_duration(libm::round(duration_s * PS_PER_S) as u64);
    count_coincidences(&streams.signal, &streams.idler, &settings)
}

/// Replicated Monte Carlo CAR for an explicit source model.
pub fn estimate_car_source(
    model: &SourceModel,
    settings: &CoincidenceSettings,
    duration_s: f64,
    seed: u64,
    replicates: u32,
) -> Result<CarEstimate> {
    if replicates < 2 {
        return Err(Error::invalid("replicates", "need at least 2"));
    }
    let values = (0..u64::from(replicates))
        .map(|k| replicate_car(model, settings, duration_s, seed, k).map(|r| r.car_estimate))
        .collect::<Result<Vec<_>>>()?;
    CarEstimate::from_replicates(values)
}

/// Replicated Monte Carlo CAR for a device at one pump power, using the
/// device's window and the default accidental offset.
pub fn estimate_car_mc(device: &DeviceConfig, pump_w: f64, duration_s: f64, seed: u64, replicates: u32) -> Result<CarEstimate> {
    let model = SourceModel::from_device(device, pump_w)?;
    let window = device.chain.window_ps();
    let settings = CoincidenceSettings::new(window, default_accidental_offset(window), window.div_ceil(16).max(1))?;
    estimate_car_source(&model, &settings, duration_s, seed, replicates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::tests::paper_device;

    fn quiet(pair_rate: f64) -> SourceModel {
        SourceModel {
            pair_rate,
            transmittance_signal: 1.0,
            transmittance_idler: 1.0,
            noise_rate_signal: 0.0,
            noise_rate_idler: 0.0,
            dark_count_signal: 0.0,
            dark_count_idler: 0.0,
            photon_lifetime_s: 0.0,
            jitter_fwhm_ps: 0.0,
            deadtime_ps: 0,
        }
    }

    #[test]
    fn zero_rates_give_empty_streams() {
        let s = simulate_source(&quiet(0.0), 1.0, &mut replicate_rng(1, 0)).unwrap();
        assert!(s.signal.is_empty() && s.idler.is_empty());
    }

    #[test]
    fn lossless_pairs_are_balanced() {
        let s = simulate_source(&quiet(1e4), 10.0, &mut replicate_rng(99, 0)).unwrap();
        assert_eq!(s.signal.len(), s.idler.len());
        let n = s.signal.len() as f64;
        assert!((n - 1e5).abs() < 4.0 * 1e5f64.sqrt(), "n = {n}");
    }

    #[test]
    fn single_pair_examples() {
        let settings = CoincidenceSettings::new(1152, 100_000, 16).unwrap();
        let r = count_coincidences(&[1000], &[1200], &settings).unwrap();
        assert_eq!(r.cc_count, 1);
        let r = count_coincidences(&[1000], &[5000], &settings).unwrap();
        assert_eq!(r.cc_count, 0);
        // window edge is inclusive
        let r = count_coincidences(&[1000], &[1576], &settings).unwrap();
        assert_eq!(r.cc_count, 1);
        let r = count_coincidences(&[1000], &[1577], &settings).unwrap();
        assert_eq!(r.cc_count, 0);
        let r = count_coincidences(&[1000], &[424], &settings).unwrap();
        assert_eq!(r.cc_count, 1);
        // accidentals look at the idler shifted by the offset
        let r = count_coincidences(&[101_000], &[1000], &settings).unwrap();
        assert_eq!((r.cc_count, r.ac_count), (0, 1));
    }

    #[test]
    fn histogram_places_delay() {
        let settings = CoincidenceSettings::new(1000, 10_000, 100).unwrap();
        let r = count_coincidences(&[5000], &[5250], &settings).unwrap();
        assert_eq!(r.histogram.start_ps, -1000);
        assert_eq!(r.histogram.counts.len(), 20);
        assert_eq!(r.histogram.counts[12], 1);
        assert_eq!(r.histogram.bin_center(12), 250.0);
        assert_eq!(r.histogram.counts.iter().sum::<u64>(), 1);
    }

    #[test]
    fn rejects_unsorted_and_bad_settings() {
        let settings = CoincidenceSettings::new(1152, 100_000, 16).unwrap();
        assert!(matches!(
            count_coincidences(&[5, 3], &[1], &settings),
            Err(Error::Unsorted { channel: Channel::Signal, index: 1 })
        ));
        assert!(matches!(
            count_coincidences(&[1], &[9, 8, 10], &settings),
            Err(Error::Unsorted { channel: Channel::Idler, index: 1 })
        ));
        assert!(CoincidenceSettings::new(1152, 1152, 16).is_err());
        assert!(CoincidenceSettings::new(0, 10, 1).is_err());
        assert!(CoincidenceSettings::new(10, 100, 0).is_err());
    }

    #[test]
    fn tag_round_trip() {
        let streams = TagStreams { signal: alloc::vec![1, 5, 5, 9], idler: alloc::vec![2, 5, 11] };
        let tags = streams.to_tags();
        assert!(tags.windows(2).all(|w| w[0].time_ps <= w[1].time_ps));
        assert_eq!(TagStreams::from_tags(&tags).unwrap(), streams);
        assert_eq!(streams.span_ps(), 10);
    }

    #[test]
    fn deadtime_is_non_paralyzable() {
        let mut t = alloc::vec![0, 5, 10, 12, 25, 26];
        apply_deadtime(&mut t, 10);
        assert_eq!(t, [0, 10, 25]);
    }

    #[test]
    fn deterministic_for_seed() {
        let d = paper_device();
        let a = simulate_timetags(&d, 1e-3, 0.05, 42).unwrap();
        let b = simulate_timetags(&d, 1e-3, 0.05, 42).unwrap();
        let c = simulate_timetags(&d, 1e-3, 0.05, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(!a.signal.is_empty());
    }

    #[test]
    fn car_counts() {
        let (est, err) = car_from_counts(110, 10);
        assert!((est - 10.0).abs() < 1e-12);
        assert!((err - 11.0 * (1.0 / 110.0 + 0.1f64).sqrt()).abs() < 1e-12);
        assert_eq!(car_from_counts(3, 0).0, f64::INFINITY);
        assert!(car_from_counts(0, 0).0.is_nan());
    }

    #[test]
    fn replicate_summary() {
        let e = CarEstimate::from_replicates(alloc::vec![1.0, 3.0]).unwrap();
        assert_eq!(e.mean, 2.0);
        assert!((e.stderr - 1.0).abs() < 1e-12);
        assert!(CarEstimate::from_replicates(alloc::vec![1.0]).is_err());
        assert!(CarEstimate::from_replicates(alloc::vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn minimal_replicates_deterministic() {
        let d = paper_device();
        let a = estimate_car_mc(&d, 1e-3, 0.5, 7, 2).unwrap();
        let b = estimate_car_mc(&d, 1e-3, 0.5, 7, 2).unwrap();
        assert_eq!(a, b);
        assert!(estimate_car_mc(&d, 1e-3, 0.5, 7, 1).is_err());
    }
}
