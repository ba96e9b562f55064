// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Electron-nuclear level structure in the rotating frame.
//!
//! The electron is restricted to its `m_s = {0, +1}` pair and treated as an
//! effective two-level system driven by `(Omega_e / 2) sigma_x`. Each nucleus
//! precesses about `z` with frequency `omega0` while the electron is in
//! `m_s = 0`, and about a tilted axis `z'` (angle `tilt` from `z`, in the x-z
//! plane) with frequency `omega1` while it is in `m_s = +1`. Nuclear-nuclear
//! couplings are ignored, so at `Omega_e = 0` every level is a sum of
//! single-spin terms and the crossing points are known in closed form.
//!
//! Basis ordering for explicit matrices: index `m * 2^N + code`, where `m` is
//! 0 for `m_s = 0` and 1 for `m_s = +1`, and `code` is the binary nuclear
//! pattern with spin 0 in the most significant bit (set bit = `+1/2`).
//!
//! Units are MHz for frequencies and mT for fields throughout.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::board::traversal_order;
use crate::engine::hamming::HammingOrder;

/// Matrix dimension limit for explicit diagonalisation (`2 * 2^12`).
pub const MAX_LEVEL_NUCLEI: usize = 12;
/// Spin count limit for exact gap minimisation.
pub const MAX_EXACT_GAP_NUCLEI: usize = 6;
/// Crossing frequencies closer than this are treated as simultaneous.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;
/// Convergence tolerance of the gap minimisation (MHz).
pub const GAP_SEARCH_TOLERANCE: f64 = 1e-6;
/// Half-width of the gap search bracket in units of `Omega_e`.
pub const GAP_SEARCH_HALF_WIDTH: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinModelError {
    #[error("invalid spin system: {0}")]
    InvalidConfig(String),
    #[error("frequency grid is empty")]
    GridEmpty,
    #[error("frequency grid is not sorted ascending")]
    GridNotSorted,
    #[error("{n} nuclei exceeds the limit of {max} for this operation")]
    DimensionTooLarge { n: usize, max: usize },
    #[error("no isolated crossing for node ({k}, {l}): {reason}")]
    CrossingNotFound { k: usize, l: usize, reason: String },
    #[error("gap minimisation for node ({k}, {l}) did not converge inside the bracket")]
    MinimizationDiverged { k: usize, l: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("negative gap {gap} at node ({k}, {l})")]
    NegativeGap { k: usize, l: usize, gap: f64 },
}

fn default_zero_field_splitting() -> f64 {
    2870.0
}

/// One nucleus, parameterised by its precession in each electronic manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuclearSpinParams {
    /// Precession frequency in `m_s = 0` (MHz).
    pub omega0: f64,
    /// Effective precession frequency in `m_s = +1` (MHz).
    pub omega1: f64,
    /// Angle between `z` and the `m_s = +1` quantisation axis `z'` (rad).
    pub tilt: f64,
    /// Signed secular hyperfine coupling (MHz).
    pub a_parallel: f64,
}

/// Physical parameters of the electron plus `N` nuclei.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinSystemConfig {
    #[serde(default = "default_zero_field_splitting")]
    pub zero_field_splitting: f64,
    /// Electron gyromagnetic ratio (MHz/mT).
    pub gyro_electron: f64,
    /// Bias field (mT).
    pub bias_field: f64,
    /// Electronic Rabi frequency (MHz).
    pub rabi: f64,
    pub n_nuclei: usize,
    pub nuclei: Vec<NuclearSpinParams>,
}

/// Sign convention of the secular hyperfine couplings on a board.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum HyperfineSign {
    #[default]
    Positive,
    Negative,
}

impl SpinSystemConfig {
    pub fn validate(&self) -> Result<(), SpinModelError> {
        let bad = |msg: String| Err(SpinModelError::InvalidConfig(msg));
        if self.n_nuclei == 0 {
            return bad("at least one nucleus is required".into());
        }
        if self.nuclei.len() != self.n_nuclei {
            return bad(format!(
                "n_nuclei = {} but {} nuclei listed",
                self.n_nuclei,
                self.nuclei.len()
            ));
        }
        if !(self.zero_field_splitting > 0.0) || !self.zero_field_splitting.is_finite() {
            return bad("zero_field_splitting must be positive".into());
        }
        if !(self.bias_field >= 0.0) || !self.bias_field.is_finite() {
            return bad("bias_field must be non-negative".into());
        }
        // Omega_e = 0 is accepted: it is the reference point for crossing positions.
        if !(self.rabi >= 0.0) || !self.rabi.is_finite() {
            return bad("rabi must be non-negative".into());
        }
        if !self.gyro_electron.is_finite() {
            return bad("gyro_electron must be finite".into());
        }
        for (j, n) in self.nuclei.iter().enumerate() {
            if !(n.omega0 > 0.0) || !n.omega0.is_finite() {
                return bad(format!("nucleus {j}: omega0 must be positive"));
            }
            if !n.omega1.is_finite() || !n.a_parallel.is_finite() {
                return bad(format!("nucleus {j}: non-finite coupling"));
            }
            if !(0.0..PI).contains(&n.tilt) {
                return bad(format!("nucleus {j}: tilt must lie in [0, pi)"));
            }
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        1 << self.n_nuclei
    }

    /// Electron transition frequency `Delta + gamma_e * B0` (MHz).
    pub fn electron_frequency(&self) -> f64 {
        self.zero_field_splitting + self.gyro_electron * self.bias_field
    }

    /// Positive unless some nucleus has a negative secular coupling.
    pub fn hyperfine_sign(&self) -> HyperfineSign {
        if self.nuclei.iter().any(|n| n.a_parallel < 0.0) {
            HyperfineSign::Negative
        } else {
            HyperfineSign::Positive
        }
    }

    /// Nuclear energy of a binary pattern in `m_s = 0`.
    pub fn manifold0_energy(&self, code: u32) -> f64 {
        self.pattern_energy(code, |n| n.omega0)
    }

    /// Nuclear energy of a tilted-axis pattern in `m_s = +1` (offset excluded).
    pub fn manifold1_energy(&self, code: u32) -> f64 {
        self.pattern_energy(code, |n| n.omega1)
    }

    fn pattern_energy(&self, code: u32, omega: impl Fn(&NuclearSpinParams) -> f64) -> f64 {
        let n = self.n_nuclei;
        self.nuclei
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let up = (code >> (n - 1 - j)) & 1 == 1;
                omega(p) * if up { 0.5 } else { -0.5 }
            })
            .sum()
    }

    /// `|<chi0(code0) | chi1(code1)>|`: overlap of a `z` product state with a
    /// tilted-axis product state.
    pub fn nuclear_overlap(&self, code0: u32, code1: u32) -> f64 {
        let n = self.n_nuclei;
        self.nuclei
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let same = ((code0 ^ code1) >> (n - 1 - j)) & 1 == 0;
                let half = 0.5 * p.tilt;
                if same {
                    half.cos().abs()
                } else {
                    half.sin().abs()
                }
            })
            .product()
    }

    /// Explicit `H(f0)` in the basis described in the module docs.
    pub fn hamiltonian(&self, f0: f64) -> DMatrix<f64> {
        let offset = self.electron_frequency() - f0;
        self.hamiltonian_with_offset(offset)
    }

    /// `H` with the `m_s = +1` diagonal offset `Delta - f0 + gamma_e B0` given
    /// directly, which avoids cancellation near a crossing.
    pub fn hamiltonian_with_offset(&self, offset: f64) -> DMatrix<f64> {
        let n = self.n_nuclei;
        let size = 1usize << n;
        let dim = 2 * size;
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for code in 0..size {
            // m_s = 0 block: diagonal in the z basis
            h[(code, code)] = self.manifold0_energy(code as u32);
            // m_s = +1 block: offset + sum_j omega1_j (cos t Iz_j + sin t Ix_j)
            let i1 = size + code;
            h[(i1, i1)] += offset;
            for (j, p) in self.nuclei.iter().enumerate() {
                let bit = n - 1 - j;
                let up = (code >> bit) & 1 == 1;
                let sz = if up { 0.5 } else { -0.5 };
                h[(i1, i1)] += p.omega1 * p.tilt.cos() * sz;
                let flipped = size + (code ^ (1 << bit));
                h[(i1, flipped)] += 0.5 * p.omega1 * p.tilt.sin();
            }
            // electronic drive
            h[(code, i1)] = 0.5 * self.rabi;
            h[(i1, code)] = 0.5 * self.rabi;
        }
        h
    }
}

/// Sorted eigenvalues of a real symmetric matrix.
fn sorted_eigenvalues(h: DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Energy levels of both manifolds on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDiagram {
    pub f0_grid: Vec<f64>,
    /// `energies0[i]` holds the `2^N` sorted `m_s = 0` levels at `f0_grid[i]`.
    pub energies0: Vec<Vec<f64>>,
    /// `energies1[i]` holds the `2^N` sorted `m_s = +1` levels at `f0_grid[i]`.
    pub energies1: Vec<Vec<f64>>,
}

impl LevelDiagram {
    /// Rows of `(f0, manifold, index, energy)` with 1-based level indices.
    pub fn rows(&self) -> impl Iterator<Item = (f64, u8, usize, f64)> + '_ {
        self.f0_grid.iter().enumerate().flat_map(move |(i, &f0)| {
            let zero = self.energies0[i]
                .iter()
                .enumerate()
                .map(move |(j, &e)| (f0, 0u8, j + 1, e));
            let plus = self.energies1[i]
                .iter()
                .enumerate()
                .map(move |(j, &e)| (f0, 1u8, j + 1, e));
            zero.chain(plus)
        })
    }
}

/// Diagonalise `H(f0)` on every grid point and split the spectrum by
/// dominant electronic character.
pub fn build_levels(
    config: &SpinSystemConfig,
    f0_grid: &[f64],
) -> Result<LevelDiagram, SpinModelError> {
    config.validate()?;
    if f0_grid.is_empty() {
        return Err(SpinModelError::GridEmpty);
    }
    if f0_grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(SpinModelError::GridNotSorted);
    }
    if config.n_nuclei > MAX_LEVEL_NUCLEI {
        return Err(SpinModelError::DimensionTooLarge {
            n: config.n_nuclei,
            max: MAX_LEVEL_NUCLEI,
        });
    }
    let size = config.n_states();
    let levels: Vec<(Vec<f64>, Vec<f64>)> = f0_grid
        .par_iter()
        .map(|&f0| {
            let eig = SymmetricEigen::new(config.hamiltonian(f0));
            let mut tagged: Vec<(f64, f64)> = (0..2 * size)
                .map(|c| {
                    let col = eig.eigenvectors.column(c);
                    let plus_weight: f64 = col.rows(size, size).iter().map(|v| v * v).sum();
                    (plus_weight, eig.eigenvalues[c])
                })
                .collect();
            // the 2^N most m_s=+1-like states form the upper manifold
            tagged.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let mut e0: Vec<f64> = tagged[..size].iter().map(|t| t.1).collect();
            let mut e1: Vec<f64> = tagged[size..].iter().map(|t| t.1).collect();
            e0.sort_by(f64::total_cmp);
            e1.sort_by(f64::total_cmp);
            (e0, e1)
        })
        .collect();
    let (energies0, energies1) = levels.into_iter().unzip();
    Ok(LevelDiagram {
        f0_grid: f0_grid.to_vec(),
        energies0,
        energies1,
    })
}

/// One anti-crossing of the board. `k` and `l` are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LacNode {
    pub k: usize,
    pub l: usize,
    pub f_cross: f64,
    pub gap: f64,
}

/// The `2^N x 2^N` grid of anti-crossings.
///
/// Row `k` is the `k`-th lowest `m_s = +1` level and column `l` the `l`-th
/// highest `m_s = 0` level, so crossing frequencies grow along both indices.
/// `row_state` / `col_state` give the Hamming index of the nuclear state
/// carried by each row and column; for boards built from tables the default
/// is `row_state[k] = k`, `col_state[l] = 2^N + 1 - l`, which makes the
/// anti-diagonal the set of nuclear-spin-conserving crossings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkerboard {
    n_states: usize,
    nodes: Vec<LacNode>,
    row_state: Vec<usize>,
    col_state: Vec<usize>,
    traversal_order: Vec<(usize, usize)>,
    degenerate_pairs: usize,
    hyperfine_sign: HyperfineSign,
}

impl Checkerboard {
    /// Assemble a board from row-major tables.
    pub fn new(
        n_states: usize,
        f_cross: Vec<f64>,
        gaps: Vec<f64>,
        row_state: Vec<usize>,
        col_state: Vec<usize>,
        hyperfine_sign: HyperfineSign,
    ) -> Result<Self, SpinModelError> {
        if n_states < 2 || !n_states.is_power_of_two() {
            return Err(SpinModelError::ShapeMismatch(format!(
                "board side {n_states} is not a power of two >= 2"
            )));
        }
        let cells = n_states * n_states;
        if f_cross.len() != cells || gaps.len() != cells {
            return Err(SpinModelError::ShapeMismatch(format!(
                "expected {cells} entries, got {} crossings and {} gaps",
                f_cross.len(),
                gaps.len()
            )));
        }
        for states in [&row_state, &col_state] {
            let mut seen = vec![false; n_states];
            for &s in states.iter() {
                if s == 0 || s > n_states || std::mem::replace(&mut seen[s - 1], true) {
                    return Err(SpinModelError::ShapeMismatch(
                        "row/column state labels must be a permutation of 1..=2^N".into(),
                    ));
                }
            }
            if states.len() != n_states {
                return Err(SpinModelError::ShapeMismatch(
                    "state label list has the wrong length".into(),
                ));
            }
        }
        let mut nodes = Vec::with_capacity(cells);
        for idx in 0..cells {
            let (k, l) = (idx / n_states + 1, idx % n_states + 1);
            let gap = gaps[idx];
            if gap < 0.0 || gap.is_nan() {
                return Err(SpinModelError::NegativeGap { k, l, gap });
            }
            if !f_cross[idx].is_finite() || !gap.is_finite() {
                return Err(SpinModelError::ShapeMismatch(format!(
                    "non-finite entry at node ({k}, {l})"
                )));
            }
            nodes.push(LacNode {
                k,
                l,
                f_cross: f_cross[idx],
                gap,
            });
        }
        let (traversal_order, degenerate_pairs) = traversal_order(n_states, &f_cross);
        if degenerate_pairs > 0 {
            log::warn!(
                "{degenerate_pairs} crossing(s) coincide within {DEGENERACY_TOLERANCE} MHz; ordered by (k, l)"
            );
        }
        Ok(Self {
            n_states,
            nodes,
            row_state,
            col_state,
            traversal_order,
            degenerate_pairs,
            hyperfine_sign,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn nodes(&self) -> &[LacNode] {
        &self.nodes
    }

    /// Node at 1-based `(k, l)`.
    pub fn node(&self, k: usize, l: usize) -> &LacNode {
        &self.nodes[(k - 1) * self.n_states + (l - 1)]
    }

    pub fn row_state(&self) -> &[usize] {
        &self.row_state
    }

    pub fn col_state(&self) -> &[usize] {
        &self.col_state
    }

    pub fn traversal_order(&self) -> &[(usize, usize)] {
        &self.traversal_order
    }

    /// Number of adjacent pairs in the traversal order that share a crossing
    /// frequency within [`DEGENERACY_TOLERANCE`].
    pub fn degenerate_pairs(&self) -> usize {
        self.degenerate_pairs
    }

    pub fn hyperfine_sign(&self) -> HyperfineSign {
        self.hyperfine_sign
    }

    pub fn with_hyperfine_sign(mut self, sign: HyperfineSign) -> Self {
        self.hyperfine_sign = sign;
        self
    }

    /// True when crossing frequencies never decrease along `k` or `l`, i.e. the
    /// sequential traversal is a down/right lattice walk.
    pub fn is_lattice_ordered(&self) -> bool {
        let m = self.n_states;
        (1..=m).all(|k| {
            (1..=m).all(|l| {
                let f = self.node(k, l).f_cross;
                (k == 1 || self.node(k - 1, l).f_cross <= f)
                    && (l == 1 || self.node(k, l - 1).f_cross <= f)
            })
        })
    }

    /// True when the anti-diagonal joins identical nuclear states.
    pub fn anti_diagonal_conserves_state(&self) -> bool {
        let m = self.n_states;
        (1..=m).all(|k| self.row_state[k - 1] == self.col_state[m - k])
    }

    /// Same board with every crossing moved by `shift` MHz.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.f_cross += shift;
        }
        out
    }

    pub fn f_cross_range(&self) -> (f64, f64) {
        self.nodes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), n| {
                (lo.min(n.f_cross), hi.max(n.f_cross))
            })
    }
}

/// Board from explicit `2^N x 2^N` gap and crossing tables, with the default
/// Hamming state labelling.
pub fn checkerboard_from_gaps(
    gaps: &[Vec<f64>],
    crossings: &[Vec<f64>],
) -> Result<Checkerboard, SpinModelError> {
    let m = gaps.len();
    if crossings.len() != m
        || gaps.iter().any(|r| r.len() != m)
        || crossings.iter().any(|r| r.len() != m)
    {
        return Err(SpinModelError::ShapeMismatch(
            "gap and crossing tables must be square with equal sides".into(),
        ));
    }
    Checkerboard::new(
        m,
        crossings.concat(),
        gaps.concat(),
        (1..=m).collect(),
        (1..=m).rev().collect(),
        HyperfineSign::Positive,
    )
}

/// Level labels of one manifold, ordered as board rows or columns.
struct ManifoldLevels {
    /// binary codes in board order
    codes: Vec<u32>,
    /// nuclear energies in board order
    energies: Vec<f64>,
}

fn manifold_levels(
    config: &SpinSystemConfig,
    hamming: &HammingOrder,
    energy: impl Fn(u32) -> f64,
    descending: bool,
) -> ManifoldLevels {
    let size = config.n_states();
    let mut codes: Vec<u32> = (0..size as u32).collect();
    codes.sort_by(|&a, &b| {
        let ord = energy(a).total_cmp(&energy(b));
        let ord = if descending { ord.reverse() } else { ord };
        ord.then(hamming.index(a).cmp(&hamming.index(b)))
    });
    let energies = codes.iter().map(|&c| energy(c)).collect();
    ManifoldLevels { codes, energies }
}

struct BoardSkeleton {
    rows: ManifoldLevels,
    cols: ManifoldLevels,
    hamming: HammingOrder,
}

impl BoardSkeleton {
    fn new(config: &SpinSystemConfig) -> Result<Self, SpinModelError> {
        let hamming = HammingOrder::new(config.n_nuclei)
            .map_err(|e| SpinModelError::InvalidConfig(e.to_string()))?;
        let rows = manifold_levels(config, &hamming, |c| config.manifold1_energy(c), false);
        let cols = manifold_levels(config, &hamming, |c| config.manifold0_energy(c), true);
        Ok(Self {
            rows,
            cols,
            hamming,
        })
    }

    fn f_cross(&self, config: &SpinSystemConfig, k: usize, l: usize) -> f64 {
        config.electron_frequency() + self.rows.energies[k] - self.cols.energies[l]
    }

    fn finish(
        self,
        config: &SpinSystemConfig,
        gaps: Vec<f64>,
    ) -> Result<Checkerboard, SpinModelError> {
        let m = config.n_states();
        let mut f_cross = Vec::with_capacity(m * m);
        for k in 0..m {
            for l in 0..m {
                f_cross.push(self.f_cross(config, k, l));
            }
        }
        let row_state = self
            .rows
            .codes
            .iter()
            .map(|&c| self.hamming.index(c))
            .collect();
        let col_state = self
            .cols
            .codes
            .iter()
            .map(|&c| self.hamming.index(c))
            .collect();
        Checkerboard::new(
            m,
            f_cross,
            gaps,
            row_state,
            col_state,
            config.hyperfine_sign(),
        )
    }
}

/// Locate all `2^(2N)` anti-crossings and extract their gaps by minimising the
/// exact eigen-gap of `H(f0)` near each crossing.
pub fn locate_lacs(config: &SpinSystemConfig) -> Result<Checkerboard, SpinModelError> {
    config.validate()?;
    if config.n_nuclei > MAX_EXACT_GAP_NUCLEI {
        return Err(SpinModelError::DimensionTooLarge {
            n: config.n_nuclei,
            max: MAX_EXACT_GAP_NUCLEI,
        });
    }
    let skeleton = BoardSkeleton::new(config)?;
    let m = config.n_states();
    let gaps: Vec<f64> = (0..m * m)
        .into_par_iter()
        .map(|idx| exact_gap(config, &skeleton, idx / m, idx % m))
        .collect::<Result<_, _>>()?;
    skeleton.finish(config, gaps)
}

/// First-order gaps `Omega_e * prod_j |<chi_j^(0)|chi_j^(1)>|` on the same
/// crossing layout as [`locate_lacs`]; usable for large `N`.
pub fn perturbative_board(config: &SpinSystemConfig) -> Result<Checkerboard, SpinModelError> {
    config.validate()?;
    if config.n_nuclei > MAX_LEVEL_NUCLEI {
        return Err(SpinModelError::DimensionTooLarge {
            n: config.n_nuclei,
            max: MAX_LEVEL_NUCLEI,
        });
    }
    let skeleton = BoardSkeleton::new(config)?;
    let m = config.n_states();
    let mut gaps = Vec::with_capacity(m * m);
    for k in 0..m {
        for l in 0..m {
            let overlap = config.nuclear_overlap(skeleton.cols.codes[l], skeleton.rows.codes[k]);
            gaps.push(config.rabi * overlap);
        }
    }
    skeleton.finish(config, gaps)
}

fn exact_gap(
    config: &SpinSystemConfig,
    skeleton: &BoardSkeleton,
    k: usize,
    l: usize,
) -> Result<f64, SpinModelError> {
    let (k1, l1) = (k + 1, l + 1);
    let e0 = skeleton.cols.energies[l];
    let e1 = skeleton.rows.energies[k];
    let scale = e0.abs().max(e1.abs()).max(1.0);
    let tie = |a: f64, b: f64| (a - b).abs() <= 1e-12 * scale;
    if skeleton
        .cols
        .energies
        .iter()
        .enumerate()
        .any(|(i, &e)| i != l && tie(e, e0))
        || skeleton
            .rows
            .energies
            .iter()
            .enumerate()
            .any(|(i, &e)| i != k && tie(e, e1))
    {
        return Err(SpinModelError::CrossingNotFound {
            k: k1,
            l: l1,
            reason: "degenerate nuclear levels within a manifold".into(),
        });
    }
    if config.rabi == 0.0 {
        return Ok(0.0);
    }
    // A spin with tilt 0 keeps I_z conserved in both manifolds, so states that
    // differ on it never couple at any order.
    let (code0, code1) = (skeleton.cols.codes[l], skeleton.rows.codes[k]);
    let n = config.n_nuclei;
    let blocked = config
        .nuclei
        .iter()
        .enumerate()
        .any(|(j, p)| p.tilt == 0.0 && ((code0 ^ code1) >> (n - 1 - j)) & 1 == 1);
    if blocked {
        return Ok(0.0);
    }
    // levels strictly below the crossing energy at the crossing point
    let below = skeleton.cols.energies.iter().filter(|&&e| e < e0).count()
        + skeleton.rows.energies.iter().filter(|&&e| e < e1).count();
    let base_offset = e0 - e1;
    let gap_at = |shift: f64| {
        let values = sorted_eigenvalues(config.hamiltonian_with_offset(base_offset - shift));
        values[below + 1] - values[below]
    };
    let half = GAP_SEARCH_HALF_WIDTH * config.rabi;
    let (shift, gap) = golden_section_min(gap_at, -half, half, GAP_SEARCH_TOLERANCE);
    if !gap.is_finite() || half - shift.abs() <= 2.0 * GAP_SEARCH_TOLERANCE {
        return Err(SpinModelError::MinimizationDiverged { k: k1, l: l1 });
    }
    Ok(gap.max(0.0))
}

/// Golden-section search for the minimum of `f` on `[lo, hi]`.
fn golden_section_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap()
}
