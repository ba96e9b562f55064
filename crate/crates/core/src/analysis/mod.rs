// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Curve fitting for spectra, buildup and relaxation series.
//!
//! All nonlinear fits use a Levenberg-Marquardt solver with analytic
//! Jacobians, started from deterministic seeds plus four perturbed copies.
//! Parameter errors are one-sigma values from the Jacobian covariance at the
//! optimum.

mod lm;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use lm::{minimize, multi_start, parameter_errors, LmOutcome, Residuals};

/// Default upper time limit for the short-time buildup rate (s).
pub const DEFAULT_SHORT_TIME_LIMIT: f64 = 1.0;
/// `FWHM = FWHM_PER_SIGMA * sigma` for a Gaussian.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("fit did not converge: {0}")]
    NoConvergence(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// `(frequency, signal)` samples with optional per-point uncertainties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub points: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<Vec<f64>>,
}

impl Spectrum {
    pub fn new(
        points: Vec<(f64, f64)>,
        uncertainty: Option<Vec<f64>>,
    ) -> Result<Self, AnalysisError> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(AnalysisError::InvalidInput(
                "frequencies must be strictly increasing".into(),
            ));
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(AnalysisError::InvalidInput("non-finite sample".into()));
        }
        if let Some(u) = &uncertainty {
            if u.len() != points.len() || u.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
                return Err(AnalysisError::InvalidInput(
                    "uncertainties must be positive, one per point".into(),
                ));
            }
        }
        Ok(Self {
            points,
            uncertainty,
        })
    }

    pub fn from_xy(x: &[f64], y: &[f64]) -> Result<Self, AnalysisError> {
        if x.len() != y.len() {
            return Err(AnalysisError::InvalidInput("x and y lengths differ".into()));
        }
        Self::new(x.iter().copied().zip(y.iter().copied()).collect(), None)
    }

    pub fn x(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn y(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Gaussian,
    Biexponential,
    ExponentialDecay,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: BTreeMap<String, f64>,
    /// One-sigma errors; `NaN` when undefined (see `flags`).
    pub param_errors: BTreeMap<String, f64>,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
    pub converged: bool,
    pub gradient_norm: f64,
    /// Conditions worth reporting: `undefined_errors`, `infinite_t1`,
    /// `negative_rate`, `zero_amplitude`.
    pub flags: Vec<String>,
}

impl FitResult {
    /// Parameter value by name; `NaN` if absent.
    pub fn param(&self, name: &str) -> f64 {
        self.params.get(name).copied().unwrap_or(f64::NAN)
    }

    pub fn error(&self, name: &str) -> f64 {
        self.param_errors.get(name).copied().unwrap_or(f64::NAN)
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    fn from_outcome(
        model: FitModel,
        names: &[String],
        outcome: &LmOutcome,
        errors: Option<Vec<f64>>,
    ) -> Self {
        let mut flags = Vec::new();
        let errors = errors.unwrap_or_else(|| {
            flags.push("undefined_errors".to_string());
            vec![f64::NAN; names.len()]
        });
        Self {
            model,
            params: names
                .iter()
                .cloned()
                .zip(outcome.params.iter().copied())
                .collect(),
            param_errors: names.iter().cloned().zip(errors).collect(),
            residual_norm: (2.0 * outcome.cost).sqrt(),
            converged: outcome.converged,
            gradient_norm: outcome.gradient_norm,
            flags,
        }
    }
}

// ---------------------------------------------------------------- Gaussian

struct GaussianProblem<'a> {
    x: &'a [f64],
    y: &'a [f64],
    inv_sigma: Option<Vec<f64>>,
    peaks: usize,
}

impl Residuals for GaussianProblem<'_> {
    fn n_params(&self) -> usize {
        3 * self.peaks
    }

    fn n_residuals(&self) -> usize {
        self.x.len()
    }

    fn eval(&self, p: &[f64], r: &mut DVector<f64>, jac: &mut DMatrix<f64>) {
        for (i, &x) in self.x.iter().enumerate() {
            let w = self.inv_sigma.as_ref().map_or(1.0, |s| s[i]);
            let mut model = 0.0;
            for j in 0..self.peaks {
                let (a, c, s) = (p[3 * j], p[3 * j + 1], p[3 * j + 2]);
                let u = (x - c) / s;
                let e = (-0.5 * u * u).exp();
                model += a * e;
                jac[(i, 3 * j)] = w * e;
                jac[(i, 3 * j + 1)] = w * a * e * u / s;
                jac[(i, 3 * j + 2)] = w * a * e * u * u / s;
            }
            r[i] = w * (model - self.y[i]);
        }
    }

    fn project(&self, p: &mut [f64]) {
        for j in 0..self.peaks {
            p[3 * j + 2] = p[3 * j + 2].abs().max(1e-12);
        }
    }
}

fn gaussian(x: f64, a: f64, c: f64, s: f64) -> f64 {
    let u = (x - c) / s;
    a * (-0.5 * u * u).exp()
}

/// Seed for one peak on a lightly smoothed signal: the maximum, with the
/// width read from the half-maximum crossings.
fn seed_peak(x: &[f64], y: &[f64]) -> [f64; 3] {
    let n = x.len();
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            y[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let span = x[n - 1] - x[0];
    let (imax, &ymax) = smooth
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let half = 0.5 * ymax;
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imax;
        for i in range {
            if smooth[i] < half {
                let t = (smooth[prev] - half) / (smooth[prev] - smooth[i]);
                return Some(x[prev] + t * (x[i] - x[prev]));
            }
            prev = i;
        }
        None
    };
    let left = crossing(&mut (0..imax).rev());
    let right = crossing(&mut (imax + 1..n));
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (x[imax] - l),
        (None, Some(r)) => 2.0 * (r - x[imax]),
        (None, None) => span / 4.0,
    };
    [
        y[imax].max(ymax),
        x[imax],
        (fwhm / FWHM_PER_SIGMA).max(span * 1e-6),
    ]
}

/// Seed for an additional peak of width about `sigma` in a residual: the
/// maximum after Gaussian smoothing at that width (a matched filter), which
/// keeps isolated noise spikes from being picked up as peaks.
fn seed_matched(x: &[f64], residual: &[f64], sigma: f64) -> [f64; 3] {
    let smooth: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let (mut num, mut den) = (0.0, 0.0);
            for (&xj, &r) in x.iter().zip(residual) {
                let w = gaussian(xj, 1.0, xi, sigma);
                num += w * r;
                den += w;
            }
            num / den
        })
        .collect();
    let (imax, &ymax) = smooth
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    // smoothing a peak of width sigma with a kernel of width sigma lowers
    // its height by sqrt(2)
    [ymax * std::f64::consts::SQRT_2, x[imax], sigma]
}

/// Seeds built greedily: fit the peaks found so far, then seed the next one
/// in the residual.
fn seed_peaks(problem: &GaussianProblem, peaks: usize) -> Vec<f64> {
    let (x, y) = (problem.x, problem.y);
    let mut seeds = seed_peak(x, y).to_vec();
    for j in 1..peaks {
        let partial = GaussianProblem {
            x,
            y,
            inv_sigma: problem.inv_sigma.clone(),
            peaks: j,
        };
        let fitted = minimize(&partial, &seeds).params;
        let residual: Vec<f64> = x
            .iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                yi - (0..j)
                    .map(|p| gaussian(xi, fitted[3 * p], fitted[3 * p + 1], fitted[3 * p + 2]))
                    .sum::<f64>()
            })
            .collect();
        let width = fitted[2].abs();
        seeds = fitted;
        seeds.extend(seed_matched(x, &residual, width));
    }
    seeds
}

/// Sum of `n_peaks` Gaussians `A exp(-(x - c)^2 / (2 sigma^2))`.
///
/// Parameters are reported as `amplitude`, `center`, `sigma` and `fwhm`
/// (the linewidth) for a single peak, and with `_1`, `_2`, ... suffixes in
/// order of decreasing amplitude otherwise. `linewidth` always holds the
/// FWHM of the strongest peak.
pub fn fit_gaussian(spec: &Spectrum, n_peaks: usize) -> Result<FitResult, AnalysisError> {
    if n_peaks == 0 {
        return Err(AnalysisError::InvalidInput(
            "n_peaks must be at least 1".into(),
        ));
    }
    let (x, y) = (spec.x(), spec.y());
    if x.len() < 4 * n_peaks {
        return Err(AnalysisError::InsufficientData(format!(
            "{} points for {n_peaks} peak(s); need at least {}",
            x.len(),
            4 * n_peaks
        )));
    }
    if y.iter().all(|&v| v == 0.0) {
        return Err(AnalysisError::InsufficientData(
            "signal is identically zero".into(),
        ));
    }
    let problem = GaussianProblem {
        x: &x,
        y: &y,
        inv_sigma: spec
            .uncertainty
            .as_ref()
            .map(|u| u.iter().map(|s| 1.0 / s).collect()),
        peaks: n_peaks,
    };
    let base = seed_peaks(&problem, n_peaks);
    let perturb = |f: &dyn Fn(usize, &mut [f64])| {
        let mut s = base.clone();
        for j in 0..n_peaks {
            f(j, &mut s[3 * j..3 * j + 3]);
        }
        s
    };
    let starts = vec![
        base.clone(),
        perturb(&|_, p| p[2] *= 1.3),
        perturb(&|_, p| p[2] *= 0.7),
        perturb(&|_, p| p[1] += 0.3 * p[2]),
        perturb(&|_, p| p[1] -= 0.3 * p[2]),
    ];
    let outcome = multi_start(&problem, &starts);
    let errors = parameter_errors(&outcome, x.len(), problem.inv_sigma.is_some());

    // order peaks by decreasing |amplitude|
    let mut order: Vec<usize> = (0..n_peaks).collect();
    order.sort_by(|&a, &b| {
        outcome.params[3 * b]
            .abs()
            .total_cmp(&outcome.params[3 * a].abs())
    });
    let mut params = BTreeMap::new();
    let mut param_errors = BTreeMap::new();
    let mut flags = Vec::new();
    if errors.is_none() {
        flags.push("undefined_errors".to_string());
    }
    for (rank, &j) in order.iter().enumerate() {
        let suffix = if n_peaks == 1 {
            String::new()
        } else {
            format!("_{}", rank + 1)
        };
        let vals = &outcome.params[3 * j..3 * j + 3];
        let errs = errors
            .as_ref()
            .map_or([f64::NAN; 3], |e| [e[3 * j], e[3 * j + 1], e[3 * j + 2]]);
        for (name, v, e) in [
            ("amplitude", vals[0], errs[0]),
            ("center", vals[1], errs[1]),
            ("sigma", vals[2], errs[2]),
            ("fwhm", FWHM_PER_SIGMA * vals[2], FWHM_PER_SIGMA * errs[2]),
        ] {
            params.insert(format!("{name}{suffix}"), v);
            param_errors.insert(format!("{name}{suffix}"), e);
        }
        if rank == 0 {
            params.insert("linewidth".into(), FWHM_PER_SIGMA * vals[2]);
            param_errors.insert("linewidth".into(), FWHM_PER_SIGMA * errs[2]);
        }
        if vals[0].abs() <= 1e-12 * y.iter().fold(0.0f64, |m, v| m.max(v.abs())) {
            flags.push("zero_amplitude".to_string());
        }
    }
    Ok(FitResult {
        model: FitModel::Gaussian,
        params,
        param_errors,
        residual_norm: (2.0 * outcome.cost).sqrt(),
        converged: outcome.converged,
        gradient_norm: outcome.gradient_norm,
        flags,
    })
}

// ----------------------------------------------------------- exponentials

struct BiexpProblem<'a> {
    t: &'a [f64],
    y: &'a [f64],
}

impl Residuals for BiexpProblem<'_> {
    fn n_params(&self) -> usize {
        4
    }

    fn n_residuals(&self) -> usize {
        self.t.len()
    }

    fn eval(&self, p: &[f64], r: &mut DVector<f64>, jac: &mut DMatrix<f64>) {
        let (a1, t1, a2, t2) = (p[0], p[1], p[2], p[3]);
        for (i, &t) in self.t.iter().enumerate() {
            let e1 = (-t / t1).exp();
            let e2 = (-t / t2).exp();
            r[i] = a1 * (1.0 - e1) + a2 * (1.0 - e2) - self.y[i];
            jac[(i, 0)] = 1.0 - e1;
            jac[(i, 1)] = -a1 * e1 * t / (t1 * t1);
            jac[(i, 2)] = 1.0 - e2;
            jac[(i, 3)] = -a2 * e2 * t / (t2 * t2);
        }
    }

    fn project(&self, p: &mut [f64]) {
        p[1] = p[1].abs().max(1e-12);
        p[3] = p[3].abs().max(1e-12);
    }
}

/// Least-squares line `y = a + b x`; returns `(a, b, err_a, err_b)` with
/// `NaN` errors for two points.
fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if x.len() <= 2 {
        return (intercept, slope, f64::NAN, f64::NAN);
    }
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let s2 = rss / (n - 2.0);
    let err_slope = (s2 / sxx).sqrt();
    let err_intercept = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    (intercept, slope, err_intercept, err_slope)
}

/// Time constant from a log-linear fit of `ln(level - y)` on the given index
/// range, where `level` is the estimated plateau.
fn log_linear_tau(t: &[f64], y: &[f64], level: f64) -> Option<f64> {
    let (lt, ly): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(y)
        .filter(|(_, &v)| level - v > 0.0)
        .map(|(&a, &v)| (a, (level - v).ln()))
        .unzip();
    if lt.len() < 2 {
        return None;
    }
    let (_, slope, _, _) = ols(&lt, &ly);
    (slope < 0.0).then(|| -1.0 / slope)
}

/// `A1 (1 - exp(-t/tau1)) + A2 (1 - exp(-t/tau2))` with `tau1 <= tau2`.
pub fn fit_biexponential(times: &[f64], values: &[f64]) -> Result<FitResult, AnalysisError> {
    check_series(times, values, 6)?;
    if values.iter().any(|&v| v < 0.0) {
        return Err(AnalysisError::InvalidInput(
            "values must be non-negative".into(),
        ));
    }
    let span = times[times.len() - 1] - times[0];
    if !(span > 0.0) {
        return Err(AnalysisError::InsufficientData("zero time span".into()));
    }
    let ymax = values.iter().fold(0.0f64, |m, &v| m.max(v));
    if ymax == 0.0 {
        return Err(AnalysisError::InsufficientData(
            "signal is identically zero".into(),
        ));
    }
    let level = 1.05 * ymax;
    let half = times.len() / 2;
    let tau_late = log_linear_tau(&times[half..], &values[half..], level).unwrap_or(span / 2.0);
    let tau_early = log_linear_tau(&times[..half.max(2)], &values[..half.max(2)], level)
        .unwrap_or(span / 20.0)
        .min(tau_late);
    let starts = vec![
        vec![0.5 * level, tau_early, 0.5 * level, tau_late],
        vec![0.3 * level, tau_early, 0.7 * level, tau_late],
        vec![0.7 * level, tau_early, 0.3 * level, tau_late],
        vec![0.5 * level, 0.3 * tau_early, 0.5 * level, 3.0 * tau_late],
        vec![0.5 * level, span / 20.0, 0.5 * level, span / 2.0],
    ];
    let problem = BiexpProblem {
        t: times,
        y: values,
    };
    let mut outcome = multi_start(&problem, &starts);
    if outcome.params[1] > outcome.params[3] {
        outcome.params.swap(0, 2);
        outcome.params.swap(1, 3);
        let perm = [2, 3, 0, 1];
        outcome.jtj = DMatrix::from_fn(4, 4, |i, j| outcome.jtj[(perm[i], perm[j])]);
    }
    let errors = parameter_errors(&outcome, times.len(), false);
    let names: Vec<String> = ["a1", "tau1", "a2", "tau2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    Ok(FitResult::from_outcome(
        FitModel::Biexponential,
        &names,
        &outcome,
        errors,
    ))
}

struct DecayProblem<'a> {
    t: &'a [f64],
    y: &'a [f64],
}

impl Residuals for DecayProblem<'_> {
    fn n_params(&self) -> usize {
        2
    }

    fn n_residuals(&self) -> usize {
        self.t.len()
    }

    fn eval(&self, p: &[f64], r: &mut DVector<f64>, jac: &mut DMatrix<f64>) {
        let (a, k) = (p[0], p[1]);
        for (i, &t) in self.t.iter().enumerate() {
            let e = (-k * t).exp();
            r[i] = a * e - self.y[i];
            jac[(i, 0)] = e;
            jac[(i, 1)] = -a * t * e;
        }
    }
}

/// Single-exponential decay `A exp(-t / T1)`.
///
/// Reported parameters: `amplitude`, `rate` (`1/T1`) and `t1`. A constant
/// series returns `t1 = inf` with the `infinite_t1` flag; a rising series
/// returns a negative rate with the `negative_rate` flag.
pub fn fit_relaxation(times: &[f64], values: &[f64]) -> Result<FitResult, AnalysisError> {
    check_series(times, values, 4)?;
    let names: Vec<String> = ["amplitude", "rate"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let (ymin, ymax) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let scale = ymax.abs().max(ymin.abs());
    if ymax - ymin <= 1e-12 * scale {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let mut result = FitResult {
            model: FitModel::ExponentialDecay,
            params: BTreeMap::from([
                ("amplitude".to_string(), mean),
                ("rate".to_string(), 0.0),
                ("t1".to_string(), f64::INFINITY),
            ]),
            param_errors: BTreeMap::from([
                ("amplitude".to_string(), 0.0),
                ("rate".to_string(), 0.0),
                ("t1".to_string(), f64::NAN),
            ]),
            residual_norm: 0.0,
            converged: true,
            gradient_norm: 0.0,
            flags: vec!["infinite_t1".to_string()],
        };
        if scale == 0.0 {
            result.flags.push("zero_amplitude".to_string());
        }
        return Ok(result);
    }
    // seed from a log-linear fit on positive samples
    let (lt, ly): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&t, &v)| (t, v.ln()))
        .unzip();
    let span = times[times.len() - 1] - times[0];
    let (a0, k0) = if lt.len() >= 2 {
        let (b, m, _, _) = ols(&lt, &ly);
        (b.exp(), -m)
    } else {
        (values[0], 1.0 / span)
    };
    let starts = vec![
        vec![a0, k0],
        vec![a0, 1.5 * k0],
        vec![a0, 0.66 * k0],
        vec![values[0], 1.0 / span],
        vec![ymax, 3.0 / span],
    ];
    let problem = DecayProblem {
        t: times,
        y: values,
    };
    let outcome = multi_start(&problem, &starts);
    let errors = parameter_errors(&outcome, times.len(), false);
    let mut result = FitResult::from_outcome(FitModel::ExponentialDecay, &names, &outcome, errors);
    let rate = result.param("rate");
    result.params.insert("t1".into(), 1.0 / rate);
    result
        .param_errors
        .insert("t1".into(), result.error("rate") / (rate * rate));
    if rate < 0.0 {
        result.flags.push("negative_rate".into());
    } else if rate == 0.0 {
        result.flags.push("infinite_t1".into());
    }
    Ok(result)
}

/// Largest pairwise difference of fitted `t1` values.
pub fn relaxation_spread(fits: &[FitResult]) -> f64 {
    let t1: Vec<f64> = fits.iter().map(|f| f.param("t1")).collect();
    let mut spread = 0.0f64;
    for (i, a) in t1.iter().enumerate() {
        for b in &t1[i + 1..] {
            if a != b {
                spread = spread.max((a - b).abs());
            }
        }
    }
    spread
}

// ----------------------------------------------------------------- linear

/// Ordinary least-squares line with parameters `intercept` and `slope`.
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<FitResult, AnalysisError> {
    check_series(x, y, 2)?;
    let (a, b, ea, eb) = ols(x, y);
    if !b.is_finite() {
        return Err(AnalysisError::InsufficientData(
            "x values are all equal".into(),
        ));
    }
    let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let mut flags = Vec::new();
    if !ea.is_finite() {
        flags.push("undefined_errors".to_string());
    }
    Ok(FitResult {
        model: FitModel::Linear,
        params: BTreeMap::from([("intercept".to_string(), a), ("slope".to_string(), b)]),
        param_errors: BTreeMap::from([("intercept".to_string(), ea), ("slope".to_string(), eb)]),
        residual_norm: rss.sqrt(),
        converged: true,
        gradient_norm: 0.0,
        flags,
    })
}

/// Initial buildup rate from an affine fit restricted to `t < t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub rate_error: f64,
    /// Offset of the affine fit (dead-time artefacts end up here).
    pub intercept: f64,
    pub n_points: usize,
}

pub fn short_time_rate(
    times: &[f64],
    values: &[f64],
    t_max: Option<f64>,
) -> Result<RateEstimate, AnalysisError> {
    if times.len() != values.len() {
        return Err(AnalysisError::InvalidInput(
            "times and values lengths differ".into(),
        ));
    }
    let t_max = t_max.unwrap_or(DEFAULT_SHORT_TIME_LIMIT);
    let (t, v): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(&t, _)| t < t_max)
        .map(|(&t, &v)| (t, v))
        .unzip();
    if t.len() < 3 {
        return Err(AnalysisError::InsufficientData(format!(
            "{} points below t_max = {t_max}; need 3",
            t.len()
        )));
    }
    let fit = fit_linear(&t, &v)?;
    Ok(RateEstimate {
        rate: fit.param("slope"),
        rate_error: fit.error("slope"),
        intercept: fit.param("intercept"),
        n_points: t.len(),
    })
}

/// Slope of fitted single-Gaussian centers against applied field offset.
pub fn center_vs_field(spectra: &[(f64, Spectrum)]) -> Result<FitResult, AnalysisError> {
    if spectra.len() < 2 {
        return Err(AnalysisError::InsufficientData(
            "need spectra at two or more fields".into(),
        ));
    }
    let mut fields = Vec::with_capacity(spectra.len());
    let mut centers = Vec::with_capacity(spectra.len());
    for (db, spec) in spectra {
        let fit = fit_gaussian(spec, 1)?;
        if !fit.converged {
            return Err(AnalysisError::NoConvergence(format!(
                "gaussian fit at field offset {db}"
            )));
        }
        fields.push(*db);
        centers.push(fit.param("center"));
    }
    fit_linear(&fields, &centers)
}

fn check_series(t: &[f64], v: &[f64], min: usize) -> Result<(), AnalysisError> {
    if t.len() != v.len() {
        return Err(AnalysisError::InvalidInput("series lengths differ".into()));
    }
    if t.len() < min {
        return Err(AnalysisError::InsufficientData(format!(
            "{} points; need at least {min}",
            t.len()
        )));
    }
    if t.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(AnalysisError::InvalidInput("non-finite sample".into()));
    }
    Ok(())
}
