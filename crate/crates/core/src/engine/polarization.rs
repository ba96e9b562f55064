// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::population::PopulationVector;
use crate::spin_model::HyperfineSign;

/// Population of the lower half of Hamming-ordered states minus the upper
/// half, both manifolds combined.
pub fn hyperpolarization(pops: &PopulationVector) -> f64 {
    let combined = pops.combined();
    let half = combined.len() / 2;
    let lower: f64 = combined[..half].iter().sum();
    let upper: f64 = combined[half..].iter().sum();
    lower - upper
}

/// Hyperpolarization together with the hyperfine-sign flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polarization {
    pub value: f64,
    /// True when the readout was suppressed because `A_parallel < 0`.
    pub suppressed: bool,
}

/// [`hyperpolarization`] for boards with positive secular hyperfine; boards
/// with a negative coupling report zero and set the flag.
pub fn signed_hyperpolarization(pops: &PopulationVector, sign: HyperfineSign) -> Polarization {
    match sign {
        HyperfineSign::Positive => Polarization {
            value: hyperpolarization(pops),
            suppressed: false,
        },
        HyperfineSign::Negative => Polarization {
            value: 0.0,
            suppressed: true,
        },
    }
}
