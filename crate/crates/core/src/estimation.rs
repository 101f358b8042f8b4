//! Least-squares estimators: Lorentzian dip (damped Gauss–Newton), weighted
//! straight line, and power law by log–log regression.
//!
//! Parameter uncertainties are 1σ from the Jacobian covariance. When the data
//! carry no uncertainties the covariance is scaled by the reduced χ².

use alloc::vec::Vec;

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::resonator::{intrinsic_q_from_fit, CouplingBranch};

/// Relative parameter change below which Gauss–Newton stops.
pub const GN_TOLERANCE: f64 = 1e-10;
/// Iteration cap for Gauss–Newton.
pub const GN_MAX_ITERATIONS: usize = 200;
const MAX_HALVINGS: usize = 60;

/// One sample with an optional 1σ uncertainty on `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XYPoint {
    /// Abscissa.
    pub x: f64,
    /// Ordinate.
    pub y: f64,
    /// 1σ uncertainty of `y`, if known.
    pub sigma: Option<f64>,
}

/// Samples sorted by strictly increasing `x`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct XYSeries {
    points: Vec<XYPoint>,
}

impl XYSeries {
    /// Sorts by `x`; rejects non-finite values, repeated `x`, non-positive
    /// uncertainties, and series mixing points with and without uncertainty.
    pub fn new(mut points: Vec<XYPoint>) -> Result<Self> {
        for p in &points {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::invalid("points", "x and y must be finite"));
            }
            if let Some(s) = p.sigma {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::invalid("points.sigma", "uncertainties must be finite and > 0"));
                }
            }
        }
        if let Some(first) = points.first() {
            let weighted = first.sigma.is_some();
            if points.iter().any(|p| p.sigma.is_some() != weighted) {
                return Err(Error::invalid("points.sigma", "either every point or none carries an uncertainty"));
            }
        }
        points.sort_by(|a, b| a.x.total_cmp(&b.x));
        if points.windows(2).any(|w| w[0].x == w[1].x) {
            return Err(Error::invalid("points.x", "x values must be distinct"));
        }
        Ok(Self { points })
    }

    /// Unweighted series from parallel slices.
    pub fn from_xy(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::invalid("points", "x and y differ in length"));
        }
        Self::new(x.iter().zip(y).map(|(&x, &y)| XYPoint { x, y, sigma: None }).collect())
    }

    /// The points in ascending `x`.
    pub fn points(&self) -> &[XYPoint] {
        &self.points
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True for an empty series.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn weighted(&self) -> bool {
        self.points.first().is_some_and(|p| p.sigma.is_some())
    }

    fn weight(p: &XYPoint) -> f64 {
        p.sigma.map_or(1.0, |s| 1.0 / (s * s))
    }
}

/// A fitted value and its 1σ uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    /// Best-fit value.
    pub value: f64,
    /// 1σ standard error.
    pub stderr: f64,
}

/// Outcome common to every fitter.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Named parameters in model order.
    pub parameters: Vec<(&'static str, Estimate)>,
    /// χ² per degree of freedom (0 when there are none).
    pub reduced_chi_square: f64,
    /// `y − model` at each point.
    pub residuals: Vec<f64>,
    /// Whether the stopping criterion was met.
    pub converged: bool,
    /// Solver iterations (0 for closed-form fits).
    pub iterations: usize,
}

impl FitReport {
    /// Looks a parameter up by name.
    pub fn get(&self, name: &str) -> Option<Estimate> {
        self.parameters.iter().find(|(n, _)| *n == name).map(|(_, e)| *e)
    }
}

/// Straight-line fit `y = slope·x + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    /// Slope.
    pub slope: Estimate,
    /// Intercept.
    pub intercept: Estimate,
    /// Slope–intercept covariance.
    pub covariance: f64,
    /// Full report.
    pub report: FitReport,
}

/// Weighted least-squares straight line, closed form.
pub fn fit_linear(data: &XYSeries) -> Result<LinearFit> {
    let pts = data.points();
    if pts.len() < 2 {
        return Err(Error::Degenerate("a line needs at least 2 points"));
    }
    let sw: f64 = pts.iter().map(XYSeries::weight).sum();
    let xm = pts.iter().map(|p| XYSeries::weight(p) * p.x).sum::<f64>() / sw;
    let ym = pts.iter().map(|p| XYSeries::weight(p) * p.y).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| XYSeries::weight(p) * (p.x - xm) * (p.x - xm)).sum();
    let sxy: f64 = pts.iter().map(|p| XYSeries::weight(p) * (p.x - xm) * (p.y - ym)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all x values are equal"));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;

    let residuals: Vec<f64> = pts.iter().map(|p| p.y - (slope * p.x + intercept)).collect();
    let chi2: f64 = pts.iter().zip(&residuals).map(|(p, r)| XYSeries::weight(p) * r * r).sum();
    let dof = pts.len() - 2;
    let reduced = if dof > 0 { chi2 / dof as f64 } else { 0.0 };
    let scale = if data.weighted() { 1.0 } else { reduced };

    let var_slope = scale / sxx;
    let var_intercept = scale * (1.0 / sw + xm * xm / sxx);
    let covariance = -scale * xm / sxx;
    let slope = Estimate { value: slope, stderr: libm::sqrt(var_slope) };
    let intercept = Estimate { value: intercept, stderr: libm::sqrt(var_intercept) };
    Ok(LinearFit {
        slope,
        intercept,
        covariance,
        report: FitReport {
            parameters: alloc::vec![("slope", slope), ("intercept", intercept)],
            reduced_chi_square: reduced,
            residuals,
            converged: true,
            iterations: 0,
        },
    })
}

/// Power law `y = amplitude·x^exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    /// Amplitude.
    pub amplitude: Estimate,
    /// Exponent.
    pub exponent: Estimate,
    /// Report; residuals are in `y`, χ² is from the log–log regression.
    pub report: FitReport,
}

/// Straight line through `(ln x, ln y)`; `σ_y/y` becomes the log uncertainty.
pub fn fit_power_law(data: &XYSeries) -> Result<PowerLawFit> {
    let mut logs = Vec::with_capacity(data.len());
    for p in data.points() {
        if !(p.x > 0.0 && p.y > 0.0) {
            return Err(Error::Domain {
                name: if p.x > 0.0 { "y" } else { "x" },
                value: if p.x > 0.0 { p.y } else { p.x },
                requirement: "power-law data must be positive",
            });
        }
        logs.push(XYPoint {
            x: libm::log(p.x),
            y: libm::log(p.y),
            sigma: p.sigma.map(|s| s / p.y),
        });
    }
    let line = fit_linear(&XYSeries::new(logs)?)?;
    let amplitude_value = libm::exp(line.intercept.value);
    let amplitude = Estimate {
        value: amplitude_value,
        stderr: amplitude_value * line.intercept.stderr,
    };
    let exponent = line.slope;
    let residuals = data
        .points()
        .iter()
        .map(|p| p.y - amplitude_value * libm::pow(p.x, exponent.value))
        .collect();
    Ok(PowerLawFit {
        amplitude,
        exponent,
        report: FitReport {
            parameters: alloc::vec![("amplitude", amplitude), ("exponent", exponent)],
            reduced_chi_square: line.report.reduced_chi_square,
            residuals,
            converged: true,
            iterations: 0,
        },
    })
}

/// Fitted resonance.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzianFit {
    /// Resonance frequency ν₀, Hz.
    pub center_hz: Estimate,
    /// Loaded Q.
    pub q_loaded: Estimate,
    /// On-resonance transmittance relative to the baseline.
    pub t_min: Estimate,
    /// Off-resonance level.
    pub baseline: Estimate,
    /// Full report (parameters `center_hz`, `q_loaded`, `t_min`, `baseline`).
    pub report: FitReport,
}

impl LorentzianFit {
    /// Loaded linewidth ν₀/Q_l, Hz.
    pub fn linewidth_hz(&self) -> f64 {
        self.center_hz.value / self.q_loaded.value
    }

    /// Intrinsic Q on the chosen coupling branch.
    pub fn q_intrinsic(&self, branch: CouplingBranch) -> Result<f64> {
        intrinsic_q_from_fit(self.q_loaded.value, self.t_min.value.max(0.0), branch)
    }
}

/// Dip model in scaled coordinates: `x = (ν − ν_ref)/Γ₀`, parameters
/// `u = [centre offset, width, t_min, baseline]` in units of `Γ₀`.
struct DipModel<'a> {
    x: &'a [f64],
    y: &'a [f64],
    w: &'a [f64],
}

impl DipModel<'_> {
    fn value(u: &Vector4<f64>, x: f64) -> f64 {
        let z = 2.0 * (x - u[0]) / u[1];
        u[3] * (1.0 - (1.0 - u[2]) / (1.0 + z * z))
    }

    fn gradient(u: &Vector4<f64>, x: f64) -> Vector4<f64> {
        let (c, width, t, b) = (u[0], u[1], u[2], u[3]);
        let z = 2.0 * (x - c) / width;
        let d = 1.0 + z * z;
        let common = b * (1.0 - t) / (d * d);
        Vector4::new(
            -4.0 * z * common / width,
            -2.0 * z * z * common / width,
            b / d,
            1.0 - (1.0 - t) / d,
        )
    }

    fn objective(&self, u: &Vector4<f64>) -> f64 {
        self.x
            .iter()
            .zip(self.y)
            .zip(self.w)
            .map(|((&x, &y), &w)| {
                let r = y - Self::value(u, x);
                w * r * r
            })
            .sum()
    }

    /// Normal matrix `JᵀWJ` and `JᵀW r`.
    fn normal_equations(&self, u: &Vector4<f64>) -> (Matrix4<f64>, Vector4<f64>) {
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for ((&x, &y), &w) in self.x.iter().zip(self.y).zip(self.w) {
            let g = Self::gradient(u, x);
            let r = y - Self::value(u, x);
            jtj += w * g * g.transpose();
            jtr += w * r * g;
        }
        (jtj, jtr)
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Linear interpolation of the `x` where `y` crosses `level` between samples
/// `a` and `b`.
fn crossing(x: &[f64], y: &[f64], a: usize, b: usize, level: f64) -> f64 {
    let f = (level - y[a]) / (y[b] - y[a]);
    x[a] + f * (x[b] - x[a])
}

/// Fits `baseline·(1 − (1 − T_min)/(1 + (2(ν − ν₀)/(ν₀/Q_l))²))` to a
/// transmission spectrum by damped Gauss–Newton.
///
/// Starts from ν₀ at the lowest sample, the baseline from the median of the
/// outer 5 % of samples at each end, `T_min = min/baseline`, and the width
/// from the interpolated half-depth crossings. Fails with [`Error::NoDip`]
/// unless a 5-sample running median dips more than 3 noise σ below the
/// baseline, so the dip must span a few samples. A step is halved until the
/// objective decreases. Stops when every scaled parameter moves by less than
/// [`GN_TOLERANCE`] relative, or after [`GN_MAX_ITERATIONS`].
pub fn fit_lorentzian_dip(spectrum: &XYSeries) -> Result<LorentzianFit> {
    let pts = spectrum.points();
    let n = pts.len();
    if n < 5 {
        return Err(Error::Degenerate("a dip fit needs at least 5 samples"));
    }
    let freq: Vec<f64> = pts.iter().map(|p| p.x).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.y).collect();
    let w: Vec<f64> = pts.iter().map(XYSeries::weight).collect();

    // baseline and noise from the wings
    let edge = (n / 20).max(2);
    let mut wings: Vec<f64> = y[..edge].iter().chain(&y[n - edge..]).copied().collect();
    let baseline0 = median(&mut wings);
    let mut diffs: Vec<f64> = y[..edge]
        .windows(2)
        .chain(y[n - edge..].windows(2))
        .map(|p| libm::fabs(p[1] - p[0]))
        .collect();
    // median |Δy| of white Gaussian noise is √2·0.6745·σ
    let noise = median(&mut diffs) / 0.953_872;

    let (i_min, &y_min) = y
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    // The depth test uses a 5-sample running median: the lowest raw sample
    // of a long flat noisy trace already sits more than 3σ below the baseline.
    let smoothed_min = (0..n)
        .map(|k| {
            let lo = k.saturating_sub(2);
            let hi = (k + 3).min(n);
            let mut window = [0.0; 5];
            window[..hi - lo].copy_from_slice(&y[lo..hi]);
            median(&mut window[..hi - lo])
        })
        .fold(f64::INFINITY, f64::min);
    let depth = baseline0 - smoothed_min;
    if !(depth > 3.0 * noise) || depth <= 1e-12 * libm::fabs(baseline0) {
        return Err(Error::NoDip { depth, noise });
    }

    let t_min0 = y_min / baseline0;
    let level = 0.5 * (baseline0 + y_min);
    let left = (0..i_min).rev().find(|&k| y[k] >= level).map(|k| crossing(&freq, &y, k, k + 1, level));
    let right = (i_min + 1..n).find(|&k| y[k] >= level).map(|k| crossing(&freq, &y, k - 1, k, level));
    let width0 = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (freq[i_min] - l),
        (None, Some(r)) => 2.0 * (r - freq[i_min]),
        (None, None) => return Err(Error::Degenerate("dip has no half-depth crossing")),
    };
    if !(width0 > 0.0) {
        return Err(Error::Degenerate("dip narrower than the sampling"));
    }
    if freq[n - 1] - freq[0] < 3.0 * width0 {
        return Err(Error::invalid("spectrum", "must span at least 3 linewidths around the dip"));
    }

    let nu_ref = freq[i_min];
    let xs: Vec<f64> = freq.iter().map(|f| (f - nu_ref) / width0).collect();
    let model = DipModel { x: &xs, y: &y, w: &w };

    let mut u = Vector4::new(0.0, 1.0, t_min0, baseline0);
    let mut cost = model.objective(&u);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < GN_MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = model.normal_equations(&u);
        let Some(step) = jtj.cholesky().map(|c| c.solve(&jtr)) else {
            return Err(Error::Degenerate("singular normal matrix"));
        };
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = u + lambda * step;
            if trial[1] > 0.0 && trial[3] > 0.0 {
                let c = model.objective(&trial);
                if c < cost {
                    accepted = Some((trial, c));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let small = |delta: &Vector4<f64>, at: &Vector4<f64>| {
            (0..4).all(|k| libm::fabs(delta[k]) <= GN_TOLERANCE * libm::fabs(at[k]).max(1e-3))
        };
        match accepted {
            Some((trial, c)) => {
                let delta = trial - u;
                u = trial;
                cost = c;
                if small(&delta, &u) {
                    converged = true;
                    break;
                }
            }
            None => {
                // no descent left in floating point: converged if the full
                // Gauss–Newton step is negligible against the uncertainties
                let dof = (n - 4) as f64;
                let scale = if spectrum.weighted() { 1.0 } else { (cost / dof).max(f64::MIN_POSITIVE) };
                converged = match jtj.try_inverse() {
                    Some(cov) => (0..4).all(|k| {
                        let sigma = libm::sqrt(cov[(k, k)] * scale);
                        libm::fabs(step[k]) <= 1e-6 * sigma || small(&step, &u)
                    }),
                    None => false,
                };
                break;
            }
        }
    }

    let residuals: Vec<f64> = xs.iter().zip(&y).map(|(&x, &yy)| yy - DipModel::value(&u, x)).collect();
    let dof = (n - 4) as f64;
    let reduced = cost / dof;
    let (jtj, _) = model.normal_equations(&u);
    let scale = if spectrum.weighted() { 1.0 } else { reduced };
    let cov = jtj.try_inverse().map(|m| m * scale).unwrap_or_else(|| Matrix4::from_element(f64::NAN));

    // (ν₀, Q_l, T_min, baseline) as functions of the scaled parameters
    let center = nu_ref + u[0] * width0;
    let width = u[1] * width0;
    let q = center / width;
    let mut jac = Matrix4::zeros();
    jac[(0, 0)] = width0;
    jac[(1, 0)] = 1.0 / u[1];
    jac[(1, 1)] = -center / (u[1] * width);
    jac[(2, 2)] = 1.0;
    jac[(3, 3)] = 1.0;
    let phys = jac * cov * jac.transpose();
    let est = |v: f64, k: usize| Estimate { value: v, stderr: libm::sqrt(phys[(k, k)].max(0.0)) };

    let center_hz = est(center, 0);
    let q_loaded = est(q, 1);
    let t_min = est(u[2], 2);
    let baseline = est(u[3], 3);
    Ok(LorentzianFit {
        center_hz,
        q_loaded,
        t_min,
        baseline,
        report: FitReport {
            parameters: alloc::vec![
                ("center_hz", center_hz),
                ("q_loaded", q_loaded),
                ("t_min", t_min),
                ("baseline", baseline),
            ],
            reduced_chi_square: reduced,
            residuals,
            converged,
            iterations,
        },
    })
}
