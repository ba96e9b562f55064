// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::transfer::{GaltonPeg, NodeRule, TransferMatrix};
use super::EngineError;
use crate::spin_model::{Checkerboard, HyperfineSign, DEGENERACY_TOLERANCE};

/// Sweep direction of the microwave frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Reverse,
}

/// A checkerboard with a redistribution rule attached to every node.
///
/// Indices `k` (rows, `m_s = +1` levels) and `l` (columns, `m_s = 0`
/// levels) are 1-based. Population on column `l` enters through the top edge
/// and population on row `k` through the left edge on a forward sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaltonBoard {
    n_states: usize,
    rules: Vec<NodeRule>,
    f_cross: Vec<f64>,
    gaps: Option<Vec<f64>>,
    row_state: Vec<usize>,
    col_state: Vec<usize>,
    traversal_order: Vec<(usize, usize)>,
    hyperfine_sign: HyperfineSign,
}

/// Node order by ascending crossing frequency; near-ties (within
/// [`DEGENERACY_TOLERANCE`]) are ordered by `(k, l)`. Returns the order and
/// the number of tied neighbours.
pub fn traversal_order(n_states: usize, f_cross: &[f64]) -> (Vec<(usize, usize)>, usize) {
    let mut order: Vec<usize> = (0..f_cross.len()).collect();
    order.sort_by(|&a, &b| f_cross[a].total_cmp(&f_cross[b]));
    let mut ties = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && (f_cross[order[end]] - f_cross[order[end - 1]]).abs() <= DEGENERACY_TOLERANCE
        {
            end += 1;
        }
        if end - start > 1 {
            ties += end - start - 1;
            // row-major index order is (k, l) order
            order[start..end].sort_unstable();
        }
        start = end;
    }
    let order = order
        .into_iter()
        .map(|idx| (idx / n_states + 1, idx % n_states + 1))
        .collect();
    (order, ties)
}

fn check_side(n_states: usize) -> Result<(), EngineError> {
    if n_states < 2 || !n_states.is_power_of_two() {
        return Err(EngineError::BadBoardSize(n_states));
    }
    Ok(())
}

impl GaltonBoard {
    /// General constructor from row-major rule and crossing tables.
    pub fn from_rules(
        n_states: usize,
        rules: Vec<NodeRule>,
        f_cross: Vec<f64>,
        row_state: Vec<usize>,
        col_state: Vec<usize>,
    ) -> Result<Self, EngineError> {
        if rules.is_empty() {
            return Err(EngineError::BoardUninitialized);
        }
        check_side(n_states)?;
        let cells = n_states * n_states;
        if rules.len() != cells || f_cross.len() != cells {
            return Err(EngineError::ShapeMismatch(format!(
                "expected {cells} nodes, got {} rules and {} crossings",
                rules.len(),
                f_cross.len()
            )));
        }
        if row_state.len() != n_states || col_state.len() != n_states {
            return Err(EngineError::ShapeMismatch("state label lists".into()));
        }
        let (traversal_order, _) = traversal_order(n_states, &f_cross);
        Ok(Self {
            n_states,
            rules,
            f_cross,
            gaps: None,
            row_state,
            col_state,
            traversal_order,
            hyperfine_sign: HyperfineSign::Positive,
        })
    }

    /// Landau-Zener board: `eta = exp(-gap^2 / sweep_rate)` at every node.
    pub fn from_checkerboard(board: &Checkerboard, sweep_rate: f64) -> Result<Self, EngineError> {
        let m = board.n_states();
        let mut rules = Vec::with_capacity(m * m);
        let mut f_cross = Vec::with_capacity(m * m);
        let mut gaps = Vec::with_capacity(m * m);
        for node in board.nodes() {
            rules.push(NodeRule::LandauZener(TransferMatrix::from_gap(
                node.gap, sweep_rate,
            )?));
            f_cross.push(node.f_cross);
            gaps.push(node.gap);
        }
        Ok(Self {
            n_states: m,
            rules,
            f_cross,
            gaps: Some(gaps),
            row_state: board.row_state().to_vec(),
            col_state: board.col_state().to_vec(),
            traversal_order: board.traversal_order().to_vec(),
            hyperfine_sign: board.hyperfine_sign(),
        })
    }

    /// Landau-Zener board from explicit tunneling probabilities, with the
    /// default labelling `row_state[k] = k`, `col_state[l] = 2^N + 1 - l`.
    pub fn from_eta_table(
        n_states: usize,
        etas: &[f64],
        f_cross: Vec<f64>,
    ) -> Result<Self, EngineError> {
        let rules = etas
            .iter()
            .map(|&e| TransferMatrix::new(e).map(NodeRule::LandauZener))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rules(
            n_states,
            rules,
            f_cross,
            (1..=n_states).collect(),
            (1..=n_states).rev().collect(),
        )
    }

    /// The uniform board: fully adiabatic anti-diagonal (`eta = 0`) and a
    /// Galton peg sending population down with probability `q` and right with
    /// probability `p` everywhere else. Crossings sit at `k + l`.
    pub fn uniform(n_states: usize, p: f64, q: f64) -> Result<Self, EngineError> {
        check_side(n_states)?;
        let peg = NodeRule::Peg(GaltonPeg::new(p, q)?);
        let swap = NodeRule::LandauZener(TransferMatrix::new(0.0)?);
        let mut rules = Vec::with_capacity(n_states * n_states);
        let mut f_cross = Vec::with_capacity(n_states * n_states);
        for k in 1..=n_states {
            for l in 1..=n_states {
                rules.push(if k + l == n_states + 1 { swap } else { peg });
                f_cross.push((k + l) as f64);
            }
        }
        Self::from_rules(
            n_states,
            rules,
            f_cross,
            (1..=n_states).collect(),
            (1..=n_states).rev().collect(),
        )
    }

    pub fn with_hyperfine_sign(mut self, sign: HyperfineSign) -> Self {
        self.hyperfine_sign = sign;
        self
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    fn idx(&self, k: usize, l: usize) -> usize {
        (k - 1) * self.n_states + (l - 1)
    }

    pub fn rule(&self, k: usize, l: usize) -> &NodeRule {
        &self.rules[self.idx(k, l)]
    }

    pub fn f_cross(&self, k: usize, l: usize) -> f64 {
        self.f_cross[self.idx(k, l)]
    }

    /// Gap of the node when the board was built from gaps.
    pub fn gap(&self, k: usize, l: usize) -> Option<f64> {
        self.gaps.as_ref().map(|g| g[self.idx(k, l)])
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

    pub fn hyperfine_sign(&self) -> HyperfineSign {
        self.hyperfine_sign
    }

    pub fn f_cross_range(&self) -> (f64, f64) {
        self.f_cross
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &f| {
                (lo.min(f), hi.max(f))
            })
    }

    /// Same board with every crossing moved by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for f in &mut out.f_cross {
            *f += shift;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_board_layout() {
        let b = GaltonBoard::uniform(4, 0.3, 0.7).unwrap();
        assert!(matches!(b.rule(1, 4), NodeRule::LandauZener(t) if t.eta() == 0.0));
        assert!(matches!(b.rule(1, 1), NodeRule::Peg(_)));
        assert_eq!(b.traversal_order()[0], (1, 1));
        assert_eq!(b.traversal_order()[1], (1, 2));
        assert_eq!(b.traversal_order()[2], (2, 1));
        assert_eq!(b.traversal_order().len(), 16);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            GaltonBoard::uniform(3, 0.5, 0.5),
            Err(EngineError::BadBoardSize(3))
        ));
        assert!(matches!(
            GaltonBoard::from_eta_table(2, &[0.5; 3], vec![0.0; 4]),
            Err(EngineError::ShapeMismatch(_))
        ));
        assert!(matches!(
            GaltonBoard::from_rules(2, vec![], vec![], vec![], vec![]),
            Err(EngineError::BoardUninitialized)
        ));
    }
}
