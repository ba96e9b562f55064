// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Population propagation through the anti-crossing checkerboard.
//!
//! Three independent routes are provided and cross-checked in the tests:
//! sequential transfer-matrix updates ([`dp_sweep`]), explicit enumeration
//! of lattice paths ([`path_probability`]), and the closed-form binomial
//! profile of the uniform board ([`analytic_full_sweep`]).

pub mod analytic;
pub mod board;
pub mod dp;
pub mod hamming;
pub mod paths;
pub mod polarization;
pub mod population;
pub mod transfer;

use thiserror::Error;

pub use analytic::analytic_full_sweep;
pub use board::{Direction, GaltonBoard};
pub use dp::{dp_sweep, dp_sweep_with, PopulationField, SweepOptions};
pub use hamming::{hamming_index, hamming_state, HammingOrder};
pub use paths::{exit_populations_by_paths, path_probability, Path, DEFAULT_PATH_LIMIT};
pub use polarization::{hyperpolarization, signed_hyperpolarization, Polarization};
pub use population::PopulationVector;
pub use transfer::{tunneling_probability, Channel, GaltonPeg, NodeRule, TransferMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("spin count {0} is outside the supported range")]
    TooManySpins(usize),
    #[error("expected a pattern of length {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("index {index} outside 1..={size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("sweep rate must be positive and finite, got {0}")]
    NonpositiveRate(f64),
    #[error("gap must be non-negative and finite, got {0}")]
    InvalidGap(f64),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("p + q = {0}, expected 1")]
    ProbabilitySum(f64),
    #[error("board has no nodes")]
    BoardUninitialized,
    #[error("board side {0} is not a power of two >= 2")]
    BadBoardSize(usize),
    #[error("table shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("population vector has {found} states per manifold, board expects {expected}")]
    InitMismatch { expected: usize, found: usize },
    #[error("populations must be non-negative and sum to 1 (sum = {0})")]
    NotNormalized(f64),
    #[error("{count} lattice paths exceed the enumeration limit {limit}")]
    PathExplosion { count: f64, limit: f64 },
    #[error("endpoints {from:?} -> {to:?} do not admit a down/right path")]
    InvalidEndpoints {
        from: (usize, usize),
        to: (usize, usize),
    },
    #[error("window [{0}, {1}] is empty or inverted")]
    InvalidWindow(f64, f64),
}
