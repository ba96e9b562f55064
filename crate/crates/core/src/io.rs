// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV and JSON import/export. CSV files are comma separated with a header
//! row and LF line endings.

use std::io::{Read, Write};

use thiserror::Error;

use crate::analysis::Spectrum;
use crate::engine::{GaltonBoard, PopulationVector};
use crate::spin_model::{Checkerboard, LevelDiagram, SpinSystemConfig};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed data: {0}")]
    Malformed(String),
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Parse a spin-system description from JSON text.
pub fn read_config<R: Read>(input: R) -> Result<SpinSystemConfig, IoError> {
    Ok(serde_json::from_reader(input)?)
}

/// Columns `f0,manifold,index,energy`.
pub fn write_levels<W: Write>(levels: &LevelDiagram, out: W) -> Result<(), IoError> {
    let mut w = writer(out);
    w.write_record(["f0", "manifold", "index", "energy"])?;
    for (f0, manifold, index, energy) in levels.rows() {
        w.write_record([
            f0.to_string(),
            manifold.to_string(),
            index.to_string(),
            energy.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `manifold,index,population`.
pub fn write_populations<W: Write>(pops: &PopulationVector, out: W) -> Result<(), IoError> {
    let mut w = writer(out);
    w.write_record(["manifold", "index", "population"])?;
    for (manifold, values) in [(0, &pops.manifold0), (1, &pops.manifold1)] {
        for (i, v) in values.iter().enumerate() {
            w.write_record([manifold.to_string(), (i + 1).to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_populations`].
pub fn read_populations<R: Read>(input: R) -> Result<PopulationVector, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows: Vec<(u8, usize, f64)> = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    let n = rows.iter().map(|r| r.1).max().unwrap_or(0);
    let mut pops = PopulationVector {
        manifold0: vec![0.0; n],
        manifold1: vec![0.0; n],
    };
    for (manifold, index, value) in rows {
        let slot = match (manifold, index) {
            (0, i) if i >= 1 => &mut pops.manifold0[i - 1],
            (1, i) if i >= 1 => &mut pops.manifold1[i - 1],
            _ => return Err(IoError::Malformed(format!("row ({manifold}, {index})"))),
        };
        *slot = value;
    }
    Ok(pops)
}

/// Columns `k,l,f_cross,gap,eta` for a gap board at a given sweep rate.
pub fn write_checkerboard<W: Write>(
    board: &Checkerboard,
    sweep_rate: f64,
    out: W,
) -> Result<(), IoError> {
    let mut w = writer(out);
    w.write_record(["k", "l", "f_cross", "gap", "eta"])?;
    for node in board.nodes() {
        let eta = crate::engine::tunneling_probability(node.gap, sweep_rate)
            .map_err(|e| IoError::Malformed(e.to_string()))?;
        w.write_record([
            node.k.to_string(),
            node.l.to_string(),
            node.f_cross.to_string(),
            node.gap.to_string(),
            eta.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `k,l,f_cross,gap,eta`; `gap` is empty when the board was built
/// from probabilities, and `eta` is the probability of staying on the
/// `m_s = 0` line.
pub fn write_galton_board<W: Write>(board: &GaltonBoard, out: W) -> Result<(), IoError> {
    use crate::engine::Channel;
    let mut w = writer(out);
    w.write_record(["k", "l", "f_cross", "gap", "eta"])?;
    let m = board.n_states();
    for k in 1..=m {
        for l in 1..=m {
            let eta = board.rule(k, l).coefficient(Channel::Zero, Channel::Zero);
            w.write_record([
                k.to_string(),
                l.to_string(),
                board.f_cross(k, l).to_string(),
                board.gap(k, l).map_or(String::new(), |g| g.to_string()),
                eta.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read `x,y[,sigma]` columns after a one-line header.
pub fn read_xy<R: Read>(input: R) -> Result<Spectrum, IoError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut points = Vec::new();
    let mut sigma = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64, IoError> {
            rec.get(i)
                .ok_or_else(|| IoError::Malformed(format!("row {}: missing column {i}", line + 2)))?
                .parse::<f64>()
                .map_err(|e| IoError::Malformed(format!("row {}: {e}", line + 2)))
        };
        points.push((parse(0)?, parse(1)?));
        if rec.len() > 2 {
            sigma.push(parse(2)?);
        }
    }
    let uncertainty = match sigma.len() {
        0 => None,
        n if n == points.len() => Some(sigma),
        _ => return Err(IoError::Malformed("sigma column is incomplete".into())),
    };
    Spectrum::new(points, uncertainty).map_err(|e| IoError::Malformed(e.to_string()))
}

/// Write `x,y` columns with a header.
pub fn write_xy<W: Write>(header: [&str; 2], x: &[f64], y: &[f64], out: W) -> Result<(), IoError> {
    let mut w = writer(out);
    w.write_record(header)?;
    for (a, b) in x.iter().zip(y) {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
