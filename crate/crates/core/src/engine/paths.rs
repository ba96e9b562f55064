// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Traversal probabilities by explicit enumeration of down/right lattice
//! paths.
//!
//! Coordinates are `(k, l)` with board nodes at `1..=2^N`. Endpoints may also
//! sit on the virtual border (`0` or `2^N + 1`) so that entry and exit edges
//! can be addressed; every interior vertex must be a real node. Each interior
//! vertex contributes the probability of leaving it in the direction of the
//! next step given the direction of arrival: `eta` when the walk continues
//! straight and `1 - eta` when it turns.
//!
//! This is deliberately the slow, obviously-correct route and serves as the
//! reference for [`crate::engine::dp_sweep`].

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::board::GaltonBoard;
use super::transfer::Channel;
use super::EngineError;

/// Default cap on the number of enumerated paths.
pub const DEFAULT_PATH_LIMIT: f64 = 1e6;

/// A nearest-neighbour walk moving only down (`k + 1`) or right (`l + 1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    vertices: Vec<(usize, usize)>,
}

impl Path {
    pub fn new(vertices: Vec<(usize, usize)>) -> Result<Self, EngineError> {
        if vertices.is_empty() {
            return Err(EngineError::ShapeMismatch("path has no vertices".into()));
        }
        for w in vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            let down = b.0 == a.0 + 1 && b.1 == a.1;
            let right = b.1 == a.1 + 1 && b.0 == a.0;
            if !(down || right) {
                return Err(EngineError::InvalidEndpoints { from: a, to: b });
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[(usize, usize)] {
        &self.vertices
    }

    /// Product of the node coefficients along the interior vertices.
    pub fn weight(&self, board: &GaltonBoard) -> Result<f64, EngineError> {
        let m = board.n_states();
        let mut w = 1.0;
        for j in 1..self.vertices.len().saturating_sub(1) {
            let (k, l) = self.vertices[j];
            if k == 0 || l == 0 || k > m || l > m {
                return Err(EngineError::InvalidEndpoints {
                    from: self.vertices[0],
                    to: *self.vertices.last().unwrap(),
                });
            }
            let from = step_channel(self.vertices[j - 1], self.vertices[j]);
            let to = step_channel(self.vertices[j], self.vertices[j + 1]);
            w *= board.rule(k, l).coefficient(from, to);
        }
        Ok(w)
    }
}

/// Down moves ride an `m_s = 0` line, right moves an `m_s = +1` line.
fn step_channel(a: (usize, usize), b: (usize, usize)) -> Channel {
    if b.0 > a.0 {
        Channel::Zero
    } else {
        Channel::Plus
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Upper bound on the number of monotone paths between two points.
fn path_count(from: (usize, usize), to: (usize, usize)) -> f64 {
    let dk = to.0 - from.0;
    let dl = to.1 - from.1;
    ln_binomial(dk + dl, dk).exp().round()
}

fn check_endpoints(
    board: &GaltonBoard,
    from: (usize, usize),
    to: (usize, usize),
) -> Result<(), EngineError> {
    let edge = board.n_states() + 1;
    let inside = |p: (usize, usize)| p.0 <= edge && p.1 <= edge;
    if !inside(from) || !inside(to) || to.0 < from.0 || to.1 < from.1 {
        return Err(EngineError::InvalidEndpoints { from, to });
    }
    Ok(())
}

/// Probability of travelling from `from` to `to`, summed over all monotone
/// paths, with the default enumeration limit.
pub fn path_probability(
    board: &GaltonBoard,
    from: (usize, usize),
    to: (usize, usize),
) -> Result<f64, EngineError> {
    path_probability_limited(board, from, to, DEFAULT_PATH_LIMIT)
}

pub fn path_probability_limited(
    board: &GaltonBoard,
    from: (usize, usize),
    to: (usize, usize),
    limit: f64,
) -> Result<f64, EngineError> {
    check_endpoints(board, from, to)?;
    if from == to {
        return Ok(1.0);
    }
    let count = path_count(from, to);
    if count > limit {
        return Err(EngineError::PathExplosion { count, limit });
    }
    let mut walker = Walker {
        board,
        m: board.n_states(),
        target: Target::Point(to),
        sink: 0.0,
        exits: None,
    };
    walker.start(from);
    Ok(walker.sink)
}

/// Exit populations of a forward sweep over the whole board, obtained by
/// enumerating every path from every entry edge cell to every exit edge cell.
///
/// `manifold0_in[l - 1]` enters at the top of column `l` and
/// `manifold1_in[k - 1]` at the left of row `k` (board order, not Hamming
/// order). Returns `(exit_zero by column, exit_plus by row)`.
pub fn exit_populations_by_paths(
    board: &GaltonBoard,
    column_in: &[f64],
    row_in: &[f64],
    limit: f64,
) -> Result<(Vec<f64>, Vec<f64>), EngineError> {
    let m = board.n_states();
    if column_in.len() != m || row_in.len() != m {
        return Err(EngineError::InitMismatch {
            expected: m,
            found: column_in.len().min(row_in.len()),
        });
    }
    let entries = (1..=m)
        .map(|l| ((0, l), column_in[l - 1]))
        .chain((1..=m).map(|k| ((k, 0), row_in[k - 1])));
    let mut bottom = vec![0.0; m];
    let mut right = vec![0.0; m];
    for (start, weight) in entries {
        if weight == 0.0 {
            continue;
        }
        let count: f64 = (1..=m)
            .map(|l| (m + 1, l))
            .chain((1..=m).map(|k| (k, m + 1)))
            .filter(|&e| e.0 >= start.0 && e.1 >= start.1)
            .map(|e| path_count(start, e))
            .sum();
        if count > limit {
            return Err(EngineError::PathExplosion { count, limit });
        }
        let mut walker = Walker {
            board,
            m,
            target: Target::AnyExit,
            sink: 0.0,
            exits: Some((vec![0.0; m], vec![0.0; m])),
        };
        walker.start(start);
        let (b, r) = walker.exits.unwrap();
        for l in 0..m {
            bottom[l] += weight * b[l];
            right[l] += weight * r[l];
        }
    }
    Ok((bottom, right))
}

enum Target {
    Point((usize, usize)),
    AnyExit,
}

struct Walker<'a> {
    board: &'a GaltonBoard,
    m: usize,
    target: Target,
    sink: f64,
    exits: Option<(Vec<f64>, Vec<f64>)>,
}

impl Walker<'_> {
    fn start(&mut self, from: (usize, usize)) {
        for dir in [Channel::Zero, Channel::Plus] {
            self.step(from, dir, 1.0);
        }
    }

    /// Move from `at` one step in `dir` carrying weight `acc`.
    fn step(&mut self, at: (usize, usize), dir: Channel, acc: f64) {
        let next = match dir {
            Channel::Zero => (at.0 + 1, at.1),
            Channel::Plus => (at.0, at.1 + 1),
        };
        match self.target {
            Target::Point(to) => {
                if next.0 > to.0 || next.1 > to.1 {
                    return;
                }
                if next == to {
                    self.sink += acc;
                    return;
                }
            }
            Target::AnyExit => {
                let (bottom, right) = self.exits.as_mut().unwrap();
                if next.0 == self.m + 1 && (1..=self.m).contains(&next.1) {
                    bottom[next.1 - 1] += acc;
                    return;
                }
                if next.1 == self.m + 1 && (1..=self.m).contains(&next.0) {
                    right[next.0 - 1] += acc;
                    return;
                }
            }
        }
        let (k, l) = next;
        // interior vertices must be real nodes
        if k == 0 || l == 0 || k > self.m || l > self.m {
            return;
        }
        let rule = *self.board.rule(k, l);
        for out in [Channel::Zero, Channel::Plus] {
            let c = rule.coefficient(dir, out);
            self.step(next, out, acc * c);
        }
    }
}
