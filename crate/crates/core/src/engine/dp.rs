// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Sequential transfer-matrix propagation.
//!
//! Every `m_s = 0` level (column `l`) and every `m_s = +1` level (row `k`)
//! carries one population channel. Visiting node `(k, l)` mixes the two
//! channels meeting there and writes the result back, so after the last node
//! the column and row channels hold the exit populations. Processing nodes in
//! crossing-frequency order is the same as solving the down/right recursion
//! on a lattice-ordered board.

use serde::{Deserialize, Serialize};

use super::board::{Direction, GaltonBoard};
use super::population::PopulationVector;
use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Closed frequency interval of active nodes; nodes outside pass through.
    pub window: Option<(f64, f64)>,
    pub direction: Direction,
    /// Keep the per-node input and output vectors.
    pub record_nodes: bool,
}

/// Channel populations `[zero, plus]` entering and leaving one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeIo {
    pub k: usize,
    pub l: usize,
    pub p_in: [f64; 2],
    pub p_out: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationField {
    /// Final population on each `m_s = 0` line, by column `l` (bottom edge on
    /// a forward sweep).
    pub exit_zero: Vec<f64>,
    /// Final population on each `m_s = +1` line, by row `k` (right edge on a
    /// forward sweep).
    pub exit_plus: Vec<f64>,
    /// Exit populations mapped back to Hamming-ordered nuclear states.
    pub readout: PopulationVector,
    pub active_nodes: usize,
    /// Set when the window contains no node; the readout equals the input.
    pub window_empty: bool,
    /// Per-node trace in processing order, if requested.
    pub nodes: Option<Vec<NodeIo>>,
}

/// Full (unwindowed) or windowed forward sweep.
pub fn dp_sweep(
    board: &GaltonBoard,
    init: &PopulationVector,
    window: Option<(f64, f64)>,
) -> Result<PopulationField, EngineError> {
    dp_sweep_with(
        board,
        init,
        &SweepOptions {
            window,
            ..SweepOptions::default()
        },
    )
}

pub fn dp_sweep_with(
    board: &GaltonBoard,
    init: &PopulationVector,
    options: &SweepOptions,
) -> Result<PopulationField, EngineError> {
    run(board, init, options, |_, _, _| {})
}

/// Like [`dp_sweep_with`], calling `observer(step, (k, l), total)` after every
/// active node with the freshly summed population over all channels.
pub fn dp_sweep_traced(
    board: &GaltonBoard,
    init: &PopulationVector,
    options: &SweepOptions,
    mut observer: impl FnMut(usize, (usize, usize), f64),
) -> Result<PopulationField, EngineError> {
    run(board, init, options, |step, node, lines: &Lines| {
        let total: f64 = lines.zero.iter().chain(&lines.plus).sum();
        observer(step, node, total)
    })
}

struct Lines {
    zero: Vec<f64>,
    plus: Vec<f64>,
}

fn run(
    board: &GaltonBoard,
    init: &PopulationVector,
    options: &SweepOptions,
    mut after_node: impl FnMut(usize, (usize, usize), &Lines),
) -> Result<PopulationField, EngineError> {
    let m = board.n_states();
    if m == 0 {
        return Err(EngineError::BoardUninitialized);
    }
    if init.n_states() != m {
        return Err(EngineError::InitMismatch {
            expected: m,
            found: init.n_states(),
        });
    }
    init.check_normalized()?;
    if let Some((lo, hi)) = options.window {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(EngineError::InvalidWindow(lo, hi));
        }
    }

    let rows = board.row_state();
    let cols = board.col_state();
    let mut lines = Lines {
        zero: cols.iter().map(|&s| init.manifold0[s - 1]).collect(),
        plus: rows.iter().map(|&s| init.manifold1[s - 1]).collect(),
    };
    let active = |f: f64| match options.window {
        Some((lo, hi)) => f >= lo && f <= hi,
        None => true,
    };
    let mut trace = options.record_nodes.then(Vec::new);
    let mut active_nodes = 0;
    let order = board.traversal_order();
    let mut visit = |&(k, l): &(usize, usize)| {
        if !active(board.f_cross(k, l)) {
            return;
        }
        let p_in = [lines.zero[l - 1], lines.plus[k - 1]];
        let p_out = board.rule(k, l).apply(p_in);
        lines.zero[l - 1] = p_out[0];
        lines.plus[k - 1] = p_out[1];
        if let Some(t) = trace.as_mut() {
            t.push(NodeIo { k, l, p_in, p_out });
        }
        after_node(active_nodes, (k, l), &lines);
        active_nodes += 1;
    };
    match options.direction {
        Direction::Forward => order.iter().for_each(&mut visit),
        Direction::Reverse => order.iter().rev().for_each(&mut visit),
    }

    let mut readout = PopulationVector {
        manifold0: vec![0.0; m],
        manifold1: vec![0.0; m],
    };
    for (l, &s) in cols.iter().enumerate() {
        readout.manifold0[s - 1] = lines.zero[l];
    }
    for (k, &s) in rows.iter().enumerate() {
        readout.manifold1[s - 1] = lines.plus[k];
    }
    Ok(PopulationField {
        exit_zero: lines.zero,
        exit_plus: lines.plus,
        readout,
        active_nodes,
        window_empty: active_nodes == 0,
        nodes: trace,
    })
}
