// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Node-level population transfer: Landau-Zener tunneling and the 2x2
//! redistribution rules applied at every anti-crossing.

use serde::{Deserialize, Serialize};

use super::EngineError;

/// The two population channels meeting at an anti-crossing.
///
/// `Zero` is population riding an `m_s = 0` level; it advances along the row
/// index `k`. `Plus` rides an `m_s = +1` level and advances along the column
/// index `l`. On a forward sweep `Zero` leaves the board through the bottom
/// edge and `Plus` through the right edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Zero = 0,
    Plus = 1,
}

impl Channel {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Self {
        match self {
            Channel::Zero => Channel::Plus,
            Channel::Plus => Channel::Zero,
        }
    }
}

/// Landau-Zener probability of diabatic passage, `exp(-gap^2 / rate)`.
///
/// `gap` is in MHz and `sweep_rate` in MHz^2 (sweep speed scaled so that the
/// exponent is dimensionless).
pub fn tunneling_probability(gap: f64, sweep_rate: f64) -> Result<f64, EngineError> {
    if !(sweep_rate > 0.0) || !sweep_rate.is_finite() {
        return Err(EngineError::NonpositiveRate(sweep_rate));
    }
    if !(gap >= 0.0) || !gap.is_finite() {
        return Err(EngineError::InvalidGap(gap));
    }
    Ok((-(gap * gap) / sweep_rate).exp())
}

/// Doubly stochastic transfer matrix `[[eta, 1-eta], [1-eta, eta]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    eta: f64,
}

impl TransferMatrix {
    pub fn new(eta: f64) -> Result<Self, EngineError> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(EngineError::ProbabilityOutOfRange(eta));
        }
        Ok(Self { eta })
    }

    pub fn identity() -> Self {
        Self { eta: 1.0 }
    }

    pub fn from_gap(gap: f64, sweep_rate: f64) -> Result<Self, EngineError> {
        Self::new(tunneling_probability(gap, sweep_rate)?)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        let e = self.eta;
        [[e, 1.0 - e], [1.0 - e, e]]
    }

    pub fn apply(&self, input: [f64; 2]) -> [f64; 2] {
        let [a, b] = input;
        let e = self.eta;
        let f = 1.0 - e;
        let straight = [e * a, e * b];
        let turned = [f * b, f * a];
        [straight[0] + turned[0], straight[1] + turned[1]]
    }
}

/// Classical Galton peg: whatever arrives leaves on `Zero` with probability
/// `q` and on `Plus` with probability `p`, independent of where it came from.
///
/// With `p = q = 1/2` it coincides with a Landau-Zener node of `eta = 1/2`;
/// otherwise it is column- but not row-stochastic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaltonPeg {
    p: f64,
    q: f64,
}

impl GaltonPeg {
    /// `p` is the probability of turning onto (or staying on) the `Plus`
    /// channel, `q` the probability for the `Zero` channel.
    pub fn new(p: f64, q: f64) -> Result<Self, EngineError> {
        for v in [p, q] {
            if !(0.0..=1.0).contains(&v) {
                return Err(EngineError::ProbabilityOutOfRange(v));
            }
        }
        if (p + q - 1.0).abs() > 1e-12 {
            return Err(EngineError::ProbabilitySum(p + q));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Redistribution rule at one node of the board.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NodeRule {
    LandauZener(TransferMatrix),
    Peg(GaltonPeg),
}

impl NodeRule {
    pub fn pass_through() -> Self {
        NodeRule::LandauZener(TransferMatrix::identity())
    }

    /// Probability that population entering on `from` leaves on `to`.
    pub fn coefficient(&self, from: Channel, to: Channel) -> f64 {
        match self {
            NodeRule::LandauZener(t) => {
                if from == to {
                    t.eta()
                } else {
                    1.0 - t.eta()
                }
            }
            NodeRule::Peg(peg) => match to {
                Channel::Zero => peg.q,
                Channel::Plus => peg.p,
            },
        }
    }

    pub fn apply(&self, input: [f64; 2]) -> [f64; 2] {
        match self {
            NodeRule::LandauZener(t) => t.apply(input),
            NodeRule::Peg(peg) => {
                let total = input[0] + input[1];
                [peg.q * total, peg.p * total]
            }
        }
    }

    /// True when the node leaves both channels untouched.
    pub fn is_pass_through(&self) -> bool {
        matches!(self, NodeRule::LandauZener(t) if t.eta() == 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tunneling_limits() {
        assert_eq!(tunneling_probability(0.0, 3.7).unwrap(), 1.0);
        let r: f64 = 0.81;
        let e1 = tunneling_probability(r.sqrt(), r).unwrap();
        assert!((e1 - (-1.0f64).exp()).abs() < 1e-15);
        assert!((e1 - 0.367879).abs() < 1e-6);
        let e10 = tunneling_probability((10.0 * r).sqrt(), r).unwrap();
        assert!((e10 - 4.54e-5).abs() < 1e-7);
    }

    #[test]
    fn tunneling_rejects_bad_rate() {
        assert!(matches!(
            tunneling_probability(1.0, 0.0),
            Err(EngineError::NonpositiveRate(_))
        ));
        assert!(tunneling_probability(1.0, -2.0).is_err());
    }

    #[test]
    fn transfer_examples() {
        let t = |e| TransferMatrix::new(e).unwrap();
        assert_eq!(t(1.0).apply([1.0, 0.0]), [1.0, 0.0]);
        assert_eq!(t(0.0).apply([1.0, 0.0]), [0.0, 1.0]);
        assert_eq!(t(0.5).apply([1.0, 0.0]), [0.5, 0.5]);
    }

    #[test]
    fn transfer_matrix_is_doubly_stochastic() {
        let m = TransferMatrix::new(0.3).unwrap().entries();
        for (i, row) in m.iter().enumerate() {
            assert!((row[0] + row[1] - 1.0).abs() < 1e-15);
            assert!((m[0][i] + m[1][i] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn peg_matches_lz_at_half() {
        let peg = NodeRule::Peg(GaltonPeg::new(0.5, 0.5).unwrap());
        let lz = NodeRule::LandauZener(TransferMatrix::new(0.5).unwrap());
        for input in [[1.0, 0.0], [0.2, 0.7], [0.0, 0.4]] {
            assert_eq!(peg.apply(input), lz.apply(input));
        }
    }

    #[test]
    fn peg_requires_unit_sum() {
        assert!(matches!(
            GaltonPeg::new(0.3, 0.6),
            Err(EngineError::ProbabilitySum(_))
        ));
    }

    #[test]
    fn coefficients_follow_straight_and_turn() {
        let lz = NodeRule::LandauZener(TransferMatrix::new(0.3).unwrap());
        assert_eq!(lz.coefficient(Channel::Zero, Channel::Zero), 0.3);
        assert_eq!(lz.coefficient(Channel::Plus, Channel::Plus), 0.3);
        assert!((lz.coefficient(Channel::Zero, Channel::Plus) - 0.7).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn transfer_conserves_and_bounds(eta in 0.0f64..=1.0, a in 0.0f64..10.0, b in 0.0f64..10.0) {
                let out = TransferMatrix::new(eta).unwrap().apply([a, b]);
                let total = a + b;
                prop_assert!((out[0] + out[1] - total).abs() <= 1e-15 * total.max(1.0));
                for v in out {
                    prop_assert!(v >= 0.0 && v <= total * (1.0 + 1e-15));
                }
            }
        }
    }
}
