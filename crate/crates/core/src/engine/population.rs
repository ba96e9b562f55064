// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::EngineError;

/// Absolute tolerance used when checking that populations sum to one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Nuclear-state occupations in both electronic manifolds, indexed by
/// Hamming order (`values[n - 1]` is state `n`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationVector {
    pub manifold0: Vec<f64>,
    pub manifold1: Vec<f64>,
}

impl PopulationVector {
    pub fn new(manifold0: Vec<f64>, manifold1: Vec<f64>) -> Result<Self, EngineError> {
        if manifold0.len() != manifold1.len() {
            return Err(EngineError::InitMismatch {
                expected: manifold0.len(),
                found: manifold1.len(),
            });
        }
        let v = Self {
            manifold0,
            manifold1,
        };
        v.check_normalized()?;
        Ok(v)
    }

    /// Equal weight `1 / n_states` on every `m_s = 0` state.
    pub fn thermal(n_states: usize) -> Self {
        Self {
            manifold0: vec![1.0 / n_states as f64; n_states],
            manifold1: vec![0.0; n_states],
        }
    }

    pub fn n_states(&self) -> usize {
        self.manifold0.len()
    }

    pub fn total(&self) -> f64 {
        self.manifold0.iter().chain(&self.manifold1).sum()
    }

    /// Combined occupation of each nuclear state across both manifolds.
    pub fn combined(&self) -> Vec<f64> {
        self.manifold0
            .iter()
            .zip(&self.manifold1)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// State for the next sweep after the electron is optically reset: all
    /// population returns to `m_s = 0` with unchanged nuclear marginals.
    pub fn electron_reset(&self) -> Self {
        Self {
            manifold0: self.combined(),
            manifold1: vec![0.0; self.n_states()],
        }
    }

    pub fn check_normalized(&self) -> Result<(), EngineError> {
        let total = self.total();
        let negative = self
            .manifold0
            .iter()
            .chain(&self.manifold1)
            .any(|&v| !(v >= 0.0));
        if negative || (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(EngineError::NotNormalized(total));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_is_normalized() {
        let v = PopulationVector::thermal(8);
        assert!(v.check_normalized().is_ok());
        assert_eq!(v.combined(), vec![0.125; 8]);
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(PopulationVector::new(vec![0.5, 0.6], vec![0.0, 0.0]).is_err());
        assert!(PopulationVector::new(vec![1.5, -0.5], vec![0.0, 0.0]).is_err());
        assert!(PopulationVector::new(vec![1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn reset_moves_everything_to_ground_manifold() {
        let v = PopulationVector::new(vec![0.1, 0.2], vec![0.3, 0.4]).unwrap();
        let r = v.electron_reset();
        assert!((r.manifold0[0] - 0.4).abs() < 1e-15 && (r.manifold0[1] - 0.6).abs() < 1e-15);
        assert_eq!(r.manifold1, vec![0.0, 0.0]);
    }
}
