// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Windowed sweeps over a distribution of electronic transition frequencies.
//!
//! A window `[f0, f0 + df]` activates only the anti-crossings whose crossing
//! frequency falls inside it; everything else passes population straight
//! through. Repeated sweeps re-enter the board from the `m_s = 0` side with
//! the previous nuclear marginals (the optical pump resets only the
//! electron).
//!
//! Spectral maps come from a [`SpectralSource`]: either one board
//! ([`SingleBoard`]) or an ensemble of identical small boards displaced by
//! quantiles of a density of states ([`DosEnsemble`]), which models a
//! spectrally broadened population of electron spins each coupled to its own
//! nuclear bath.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use thiserror::Error;

use crate::engine::{
    dp_sweep_with, signed_hyperpolarization, Direction, EngineError, GaltonBoard, NodeRule,
    PopulationVector, SweepOptions, TransferMatrix,
};
use crate::spin_model::{Checkerboard, HyperfineSign, SpinModelError};

/// Tolerance on the integral of a tabulated density.
pub const TABLE_NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    SpinModel(#[from] SpinModelError),
    #[error("tabulated density integrates to {0}, expected 1")]
    UnnormalizedTable(f64),
    #[error("invalid density model: {0}")]
    InvalidDos(String),
    #[error("invalid sweep specification: {0}")]
    InvalidSpec(String),
    #[error("frequency range is empty or step is not positive")]
    EmptyRange,
    #[error("times must be non-negative and ascending")]
    InvalidTimes,
    #[error("invalid buildup model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DosKind {
    Gaussian,
    Tabulated,
}

/// Density of electronic transition frequencies.
///
/// For the Gaussian form `width` is the standard deviation; a width of zero
/// is a delta function at `center`. The tabulated form is piecewise linear
/// between `(frequency, density)` samples and must integrate to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DosModel {
    pub kind: DosKind,
    pub center: f64,
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<(f64, f64)>>,
}

impl DosModel {
    pub fn gaussian(center: f64, width: f64) -> Result<Self, SweepError> {
        let dos = Self {
            kind: DosKind::Gaussian,
            center,
            width,
            table: None,
        };
        dos.validate()?;
        Ok(dos)
    }

    pub fn tabulated(table: Vec<(f64, f64)>) -> Result<Self, SweepError> {
        let mut dos = Self {
            kind: DosKind::Tabulated,
            center: 0.0,
            width: 0.0,
            table: Some(table),
        };
        dos.validate()?;
        // record the mean and standard deviation for reference
        let mean = dos.moment(|f| f);
        dos.center = mean;
        dos.width = dos.moment(|f| (f - mean) * (f - mean)).sqrt();
        Ok(dos)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        match self.kind {
            DosKind::Gaussian => {
                if !self.center.is_finite() || !(self.width >= 0.0) || !self.width.is_finite() {
                    return Err(SweepError::InvalidDos(
                        "gaussian needs a finite center and non-negative width".into(),
                    ));
                }
            }
            DosKind::Tabulated => {
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| SweepError::InvalidDos("missing table".into()))?;
                if table.len() < 2 {
                    return Err(SweepError::InvalidDos("table needs two rows".into()));
                }
                if table.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(SweepError::InvalidDos(
                        "table frequencies must increase".into(),
                    ));
                }
                if table
                    .iter()
                    .any(|&(f, d)| !f.is_finite() || !(d >= 0.0) || !d.is_finite())
                {
                    return Err(SweepError::InvalidDos(
                        "densities must be finite and non-negative".into(),
                    ));
                }
                let total = self.table_cdf(f64::INFINITY);
                if (total - 1.0).abs() > TABLE_NORMALIZATION_TOLERANCE {
                    return Err(SweepError::UnnormalizedTable(total));
                }
            }
        }
        Ok(())
    }

    fn moment(&self, g: impl Fn(f64) -> f64) -> f64 {
        // trapezoid on a refined copy of the table
        let table = self.table.as_deref().unwrap_or(&[]);
        let mut acc = 0.0;
        for w in table.windows(2) {
            let ((f0, d0), (f1, d1)) = (w[0], w[1]);
            let steps = 64;
            let h = (f1 - f0) / steps as f64;
            for i in 0..steps {
                let a = f0 + i as f64 * h;
                let b = a + h;
                let da = d0 + (d1 - d0) * (a - f0) / (f1 - f0);
                let db = d0 + (d1 - d0) * (b - f0) / (f1 - f0);
                acc += 0.5 * h * (da * g(a) + db * g(b));
            }
        }
        acc
    }

    /// Probability density at `f`. Returns infinity at the location of a
    /// delta function.
    pub fn density(&self, f: f64) -> f64 {
        match self.kind {
            DosKind::Gaussian => {
                if self.width == 0.0 {
                    return if f == self.center { f64::INFINITY } else { 0.0 };
                }
                let z = (f - self.center) / self.width;
                (-0.5 * z * z).exp() / (self.width * (2.0 * std::f64::consts::PI).sqrt())
            }
            DosKind::Tabulated => {
                let table = self.table.as_deref().unwrap_or(&[]);
                let i = table.partition_point(|&(x, _)| x <= f);
                if i == 0 || i == table.len() {
                    return 0.0;
                }
                let ((f0, d0), (f1, d1)) = (table[i - 1], table[i]);
                d0 + (d1 - d0) * (f - f0) / (f1 - f0)
            }
        }
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, f: f64) -> f64 {
        match self.kind {
            DosKind::Gaussian => {
                if self.width == 0.0 {
                    return if f >= self.center { 1.0 } else { 0.0 };
                }
                0.5 * (1.0 + erf((f - self.center) / (self.width * std::f64::consts::SQRT_2)))
            }
            DosKind::Tabulated => self.table_cdf(f),
        }
    }

    fn table_cdf(&self, f: f64) -> f64 {
        let table = self.table.as_deref().unwrap_or(&[]);
        let mut acc = 0.0;
        for w in table.windows(2) {
            let ((f0, d0), (f1, d1)) = (w[0], w[1]);
            if f <= f0 {
                break;
            }
            let b = f.min(f1);
            let db = d0 + (d1 - d0) * (b - f0) / (f1 - f0);
            acc += 0.5 * (b - f0) * (d0 + db);
        }
        acc
    }

    /// Inverse CDF for `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self.kind {
            DosKind::Gaussian if self.width == 0.0 => self.center,
            DosKind::Gaussian => {
                let normal = statrs::distribution::Normal::new(self.center, self.width)
                    .expect("validated width");
                statrs::distribution::ContinuousCDF::inverse_cdf(&normal, u)
            }
            DosKind::Tabulated => {
                let table = self.table.as_deref().unwrap_or(&[]);
                let (mut lo, mut hi) = (table[0].0, table[table.len() - 1].0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-12 * (1.0 + mid.abs()) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// Frequencies at the `n` mid-quantiles `(i + 1/2) / n`.
    pub fn quantiles(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| self.quantile((i as f64 + 0.5) / n as f64))
            .collect()
    }
}

/// Fraction of the density inside `[f0, f0 + df]`.
pub fn integrate_dos(dos: &DosModel, f0: f64, df: f64) -> Result<f64, SweepError> {
    if !(df > 0.0) || !df.is_finite() || !f0.is_finite() {
        return Err(SweepError::InvalidSpec(format!(
            "window width must be positive, got {df}"
        )));
    }
    dos.validate()?;
    Ok((dos.cdf(f0 + df) - dos.cdf(f0)).clamp(0.0, 1.0))
}

/// Board whose rows (`m_s = +1` levels) sit at frequencies drawn from `dos`.
///
/// Levels are placed at mid-quantiles when `seed` is `None` and sampled by
/// inverse transform from a ChaCha8 stream otherwise. All `m_s = 0` levels
/// share one energy, so crossings of row `k` all sit at the row frequency.
/// Gaps decay with the Hamming distance `d` between the row and column
/// nuclear states as `gap_scale * 2^(-d/2)`, so the state-conserving
/// anti-diagonal carries the largest gaps.
pub fn sample_board_from_dos(
    dos: &DosModel,
    n_states: usize,
    gap_scale: f64,
    seed: Option<u64>,
) -> Result<Checkerboard, SweepError> {
    dos.validate()?;
    if n_states < 2 || !n_states.is_power_of_two() {
        return Err(EngineError::BadBoardSize(n_states).into());
    }
    if !(gap_scale >= 0.0) || !gap_scale.is_finite() {
        return Err(SweepError::InvalidSpec(
            "gap_scale must be non-negative".into(),
        ));
    }
    let mut levels = match seed {
        None => dos.quantiles(n_states),
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n_states)
                .map(|_| {
                    // open interval keeps the inverse CDF finite
                    let u: f64 = rng.random_range(f64::EPSILON..1.0);
                    dos.quantile(u)
                })
                .collect()
        }
    };
    levels.sort_by(f64::total_cmp);
    let n_spins = n_states.trailing_zeros() as usize;
    let order = crate::engine::HammingOrder::new(n_spins)?;
    let mut f_cross = Vec::with_capacity(n_states * n_states);
    let mut gaps = Vec::with_capacity(n_states * n_states);
    for (k, &level) in levels.iter().enumerate() {
        for l in 0..n_states {
            let row_code = order.code(k + 1);
            let col_code = order.code(n_states - l);
            let d = (row_code ^ col_code).count_ones() as i32;
            f_cross.push(level);
            gaps.push(gap_scale * 2f64.powf(-0.5 * d as f64));
        }
    }
    Ok(Checkerboard::new(
        n_states,
        f_cross,
        gaps,
        (1..=n_states).collect(),
        (1..=n_states).rev().collect(),
        HyperfineSign::Positive,
    )?)
}

/// One windowed sweep protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Low-frequency edge `f0` of the window (MHz).
    pub window_start: f64,
    /// Window width `df` (MHz).
    pub window_width: f64,
    /// Sweep rate in MHz^2.
    pub sweep_rate: f64,
    pub direction: Direction,
    pub n_sweeps: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.window_width > 0.0) || !self.window_width.is_finite() {
            return Err(SweepError::InvalidSpec(
                "window_width must be positive".into(),
            ));
        }
        if !(self.sweep_rate > 0.0) || !self.sweep_rate.is_finite() {
            return Err(SweepError::InvalidSpec(
                "sweep_rate must be positive".into(),
            ));
        }
        if self.n_sweeps == 0 {
            return Err(SweepError::InvalidSpec(
                "n_sweeps must be at least 1".into(),
            ));
        }
        if !self.window_start.is_finite() {
            return Err(SweepError::InvalidSpec(
                "window_start must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn window(&self) -> (f64, f64) {
        (self.window_start, self.window_start + self.window_width)
    }

    pub fn at(&self, window_start: f64) -> Self {
        Self {
            window_start,
            ..*self
        }
    }
}

/// Outcome of [`simulate_window_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSweep {
    pub populations: PopulationVector,
    pub polarization: f64,
    /// Set when the readout was zeroed because of a negative hyperfine sign.
    pub suppressed: bool,
    pub window_empty: bool,
}

/// Run `spec.n_sweeps` windowed sweeps with an electron reset in between.
///
/// The board's tunneling probabilities are taken as given; build it with the
/// sweep rate of `spec` (see [`simulate_checkerboard_sweep`]).
pub fn simulate_window_sweep(
    board: &GaltonBoard,
    spec: &SweepSpec,
    init: &PopulationVector,
) -> Result<WindowSweep, SweepError> {
    spec.validate()?;
    let options = SweepOptions {
        window: Some(spec.window()),
        direction: spec.direction,
        record_nodes: false,
    };
    let mut state = init.clone();
    let mut window_empty = true;
    for sweep in 0..spec.n_sweeps {
        if sweep > 0 {
            state = state.electron_reset();
        }
        let field = dp_sweep_with(board, &state, &options)?;
        window_empty &= field.window_empty;
        state = field.readout;
    }
    let p = signed_hyperpolarization(&state, board.hyperfine_sign());
    Ok(WindowSweep {
        populations: state,
        polarization: p.value,
        suppressed: p.suppressed,
        window_empty,
    })
}

/// [`simulate_window_sweep`] on a gap board, with tunneling probabilities
/// computed from `spec.sweep_rate`.
pub fn simulate_checkerboard_sweep(
    board: &Checkerboard,
    spec: &SweepSpec,
    init: &PopulationVector,
) -> Result<WindowSweep, SweepError> {
    spec.validate()?;
    let galton = GaltonBoard::from_checkerboard(board, spec.sweep_rate)?;
    simulate_window_sweep(&galton, spec, init)
}

/// Anything that turns a windowed sweep into a polarization value.
pub trait SpectralSource: Sync {
    /// Lowest and highest frequency at which any node can be active.
    fn support(&self) -> (f64, f64);

    /// Polarization after the sweep protocol `spec`, starting from the
    /// thermal state.
    fn polarization(&self, spec: &SweepSpec) -> Result<f64, SweepError>;

    fn describe(&self) -> BoardSummary;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardSummary {
    pub kind: String,
    pub n_states: usize,
    pub members: usize,
    pub f_cross_min: f64,
    pub f_cross_max: f64,
}

/// A single board swept directly.
#[derive(Debug, Clone)]
pub struct SingleBoard {
    board: GaltonBoard,
}

impl SingleBoard {
    pub fn new(board: GaltonBoard) -> Self {
        Self { board }
    }

    pub fn board(&self) -> &GaltonBoard {
        &self.board
    }
}

impl SpectralSource for SingleBoard {
    fn support(&self) -> (f64, f64) {
        self.board.f_cross_range()
    }

    fn polarization(&self, spec: &SweepSpec) -> Result<f64, SweepError> {
        let init = PopulationVector::thermal(self.board.n_states());
        Ok(simulate_window_sweep(&self.board, spec, &init)?.polarization)
    }

    fn describe(&self) -> BoardSummary {
        let (lo, hi) = self.support();
        BoardSummary {
            kind: "single".into(),
            n_states: self.board.n_states(),
            members: 1,
            f_cross_min: lo,
            f_cross_max: hi,
        }
    }
}

/// Copies of one member board displaced by the mid-quantiles of a density of
/// states; the polarization is the ensemble mean.
#[derive(Debug, Clone)]
pub struct DosEnsemble {
    member: GaltonBoard,
    offsets: Vec<f64>,
    member_range: (f64, f64),
}

impl DosEnsemble {
    /// `member` crossings are relative to the offsets drawn from `dos`.
    pub fn new(member: GaltonBoard, dos: &DosModel, n_members: usize) -> Result<Self, SweepError> {
        dos.validate()?;
        if n_members == 0 {
            return Err(SweepError::InvalidSpec(
                "ensemble needs at least one member".into(),
            ));
        }
        let member_range = member.f_cross_range();
        Ok(Self {
            member,
            offsets: dos.quantiles(n_members),
            member_range,
        })
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn member(&self) -> &GaltonBoard {
        &self.member
    }
}

impl SpectralSource for DosEnsemble {
    fn support(&self) -> (f64, f64) {
        let first = self.offsets.first().copied().unwrap_or(0.0);
        let last = self.offsets.last().copied().unwrap_or(0.0);
        (first + self.member_range.0, last + self.member_range.1)
    }

    fn polarization(&self, spec: &SweepSpec) -> Result<f64, SweepError> {
        spec.validate()?;
        let (lo, hi) = spec.window();
        let init = PopulationVector::thermal(self.member.n_states());
        let mut total = 0.0;
        for &c in &self.offsets {
            // shifting the window instead of the board
            if hi - c < self.member_range.0 || lo - c > self.member_range.1 {
                continue;
            }
            let local = spec.at(lo - c);
            total += simulate_window_sweep(&self.member, &local, &init)?.polarization;
        }
        Ok(total / self.offsets.len() as f64)
    }

    fn describe(&self) -> BoardSummary {
        let (lo, hi) = self.support();
        BoardSummary {
            kind: "dos-ensemble".into(),
            n_states: self.member.n_states(),
            members: self.offsets.len(),
            f_cross_min: lo,
            f_cross_max: hi,
        }
    }
}

/// Member board with a fully adiabatic passage wherever the row and column
/// carry the same nuclear state and tunneling probability `eta` elsewhere.
pub fn state_conserving_member(board: &Checkerboard, eta: f64) -> Result<GaltonBoard, SweepError> {
    let m = board.n_states();
    let swap = NodeRule::LandauZener(TransferMatrix::new(0.0)?);
    let mix = NodeRule::LandauZener(TransferMatrix::new(eta)?);
    let mut rules = Vec::with_capacity(m * m);
    let mut f_cross = Vec::with_capacity(m * m);
    for node in board.nodes() {
        let same = board.row_state()[node.k - 1] == board.col_state()[node.l - 1];
        rules.push(if same { swap } else { mix });
        f_cross.push(node.f_cross);
    }
    let galton = GaltonBoard::from_rules(
        m,
        rules,
        f_cross,
        board.row_state().to_vec(),
        board.col_state().to_vec(),
    )?;
    Ok(galton.with_hyperfine_sign(board.hyperfine_sign()))
}

/// Run metadata stored alongside a spectral map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub spec: SweepSpec,
    pub dos: Option<DosModel>,
    pub board: BoardSummary,
    pub seed: Option<u64>,
    pub f0_range: (f64, f64),
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMapResult {
    /// `(f0, P)` sorted by `f0`.
    pub points: Vec<(f64, f64)>,
    pub metadata: MapMetadata,
}

impl SpectralMapResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SweepError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["f0", "P"])?;
        for &(f0, p) in &self.points {
            w.write_record([f0.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_metadata<W: Write>(&self, out: W) -> Result<(), SweepError> {
        serde_json::to_writer_pretty(out, &self.metadata)?;
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }
}

/// Window edges `lo, lo + step, ...` up to `hi` inclusive.
pub fn frequency_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, SweepError> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(SweepError::EmptyRange);
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}

/// Polarization as a function of the window edge `f0`, evaluated in
/// parallel and returned in ascending `f0`.
pub fn map_spectrum(
    source: &dyn SpectralSource,
    f0_range: (f64, f64),
    step: f64,
    template: &SweepSpec,
) -> Result<SpectralMapResult, SweepError> {
    template.validate()?;
    let grid = frequency_grid(f0_range.0, f0_range.1, step)?;
    let points = grid
        .par_iter()
        .map(|&f0| Ok((f0, source.polarization(&template.at(f0))?)))
        .collect::<Result<Vec<_>, SweepError>>()?;
    Ok(SpectralMapResult {
        points,
        metadata: MapMetadata {
            spec: *template,
            dos: None,
            board: source.describe(),
            seed: None,
            f0_range,
            step,
        },
    })
}

/// Single-rate buildup: `dP/dt = r (P_max - P) - Gamma1 P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildupModel {
    /// Injection rate `r` (1/s).
    pub injection_rate: f64,
    /// Nuclear relaxation rate `Gamma1 = 1/T1n` (1/s).
    pub relaxation: f64,
    /// Saturation polarization.
    pub p_max: f64,
}

impl BuildupModel {
    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.injection_rate >= 0.0) || !self.injection_rate.is_finite() {
            return Err(SweepError::InvalidModel(
                "injection_rate must be >= 0".into(),
            ));
        }
        if !(self.relaxation > 0.0) || !self.relaxation.is_finite() {
            return Err(SweepError::InvalidModel("relaxation must be > 0".into()));
        }
        if !(self.p_max > 0.0 && self.p_max <= 1.0) {
            return Err(SweepError::InvalidModel("p_max must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn steady_state(&self) -> f64 {
        self.p_max * self.injection_rate / (self.injection_rate + self.relaxation)
    }

    pub fn initial_slope(&self) -> f64 {
        self.p_max * self.injection_rate
    }

    pub fn at(&self, t: f64) -> f64 {
        let total = self.injection_rate + self.relaxation;
        // -expm1 keeps the small-t slope exact
        self.steady_state() * -(-total * t).exp_m1()
    }
}

pub fn accumulate_buildup(model: &BuildupModel, times: &[f64]) -> Result<Vec<f64>, SweepError> {
    model.validate()?;
    if times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0])
    {
        return Err(SweepError::InvalidTimes);
    }
    Ok(times.iter().map(|&t| model.at(t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_window_integrals() {
        let dos = DosModel::gaussian(100.0, 13.5).unwrap();
        assert!((integrate_dos(&dos, -1e4, 2e4).unwrap() - 1.0).abs() < 1e-15);
        assert!(integrate_dos(&dos, 100.0 + 10.0 * 13.5, 5.0).unwrap() < 1e-6);
        assert!(integrate_dos(&dos, 0.0, 0.0).is_err());
    }

    #[test]
    fn tabulated_dos_checks_normalization() {
        let table = vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)];
        let dos = DosModel::tabulated(table).unwrap();
        assert!((dos.center - 1.0).abs() < 1e-9);
        assert!((integrate_dos(&dos, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((dos.quantile(0.5) - 1.0).abs() < 1e-9);
        assert!(matches!(
            DosModel::tabulated(vec![(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]),
            Err(SweepError::UnnormalizedTable(_))
        ));
    }

    #[test]
    fn sampled_boards_are_deterministic() {
        let dos = DosModel::gaussian(100.0, 13.5).unwrap();
        let a = sample_board_from_dos(&dos, 16, 1.0, Some(7)).unwrap();
        let b = sample_board_from_dos(&dos, 16, 1.0, Some(7)).unwrap();
        let c = sample_board_from_dos(&dos, 16, 1.0, Some(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.is_lattice_ordered());
        assert!(a.anti_diagonal_conserves_state());
    }

    #[test]
    fn delta_dos_collapses_crossings() {
        let dos = DosModel::gaussian(50.0, 0.0).unwrap();
        let board = sample_board_from_dos(&dos, 4, 1.0, None).unwrap();
        assert!(board.nodes().iter().all(|n| n.f_cross == 50.0));
        assert_eq!(board.degenerate_pairs(), 15);
    }

    #[test]
    fn buildup_limits() {
        let m = BuildupModel {
            injection_rate: 0.07,
            relaxation: 1.0 / 30.0,
            p_max: 0.5,
        };
        let p = accumulate_buildup(&m, &[0.0, 1e-9, 1e6]).unwrap();
        assert_eq!(p[0], 0.0);
        assert!((p[1] / 1e-9 - m.initial_slope()).abs() < 1e-9);
        assert!((p[2] - m.steady_state()).abs() < 1e-15);
        assert!(accumulate_buildup(&m, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn grid_includes_end_point() {
        let g = frequency_grid(40.0, 41.0, 0.25).unwrap();
        assert_eq!(g, vec![40.0, 40.25, 40.5, 40.75, 41.0]);
        assert!(frequency_grid(1.0, 0.0, 0.1).is_err());
        assert!(frequency_grid(0.0, 1.0, 0.0).is_err());
    }
}
