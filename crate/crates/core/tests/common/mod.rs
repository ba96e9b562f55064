// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use galton_dnp::analysis::Spectrum;
use galton_dnp::engine::{Direction, GaltonBoard, PopulationVector};
use galton_dnp::spin_model::{perturbative_board, NuclearSpinParams, SpinSystemConfig};
use galton_dnp::sweep::{
    map_spectrum, sample_board_from_dos, state_conserving_member, DosEnsemble, DosModel,
    SingleBoard, SpectralMapResult, SweepSpec,
};
use rand::Rng;

pub const MAP_CENTER: f64 = 100.0;
pub const MAP_WIDTH: f64 = 13.5;
pub const MAP_WINDOWS: [f64; 3] = [1.0, 2.5, 4.0];
pub const ENSEMBLE_MEMBERS: usize = 256;
pub const OFF_DIAGONAL_ETA: f64 = 0.5;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("data")
        .join(name)
}

pub fn read_golden_profile(name: &str) -> PopulationVector {
    let file = std::fs::File::open(data_path(name)).expect("golden file present");
    galton_dnp::io::read_populations(file).expect("golden file parses")
}

/// Crossings `a_k + b_l` with increasing `a`, `b`.
pub fn random_lattice_crossings<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let mut a: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..10.0)).collect();
    let mut b: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..10.0)).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let mut f = Vec::with_capacity(m * m);
    for ak in &a {
        for bl in &b {
            f.push(ak + bl);
        }
    }
    f
}

pub fn lattice_crossings(m: usize) -> Vec<f64> {
    (1..=m)
        .flat_map(|k| (1..=m).map(move |l| (k + l) as f64))
        .collect()
}

pub fn random_board<R: Rng>(rng: &mut R, m: usize) -> GaltonBoard {
    let etas: Vec<f64> = (0..m * m).map(|_| rng.random_range(0.0..=1.0)).collect();
    let f = random_lattice_crossings(rng, m);
    GaltonBoard::from_eta_table(m, &etas, f).unwrap()
}

pub fn random_init<R: Rng>(rng: &mut R, m: usize) -> PopulationVector {
    let raw: Vec<f64> = (0..2 * m).map(|_| rng.random_range(0.0..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let scaled: Vec<f64> = raw.iter().map(|v| v / total).collect();
    PopulationVector::new(scaled[..m].to_vec(), scaled[m..].to_vec()).unwrap()
}

/// Initial populations rearranged into board order (by column, by row).
pub fn board_order_inputs(board: &GaltonBoard, init: &PopulationVector) -> (Vec<f64>, Vec<f64>) {
    let cols = board
        .col_state()
        .iter()
        .map(|&s| init.manifold0[s - 1])
        .collect();
    let rows = board
        .row_state()
        .iter()
        .map(|&s| init.manifold1[s - 1])
        .collect();
    (cols, rows)
}

pub fn gauss(x: f64, amplitude: f64, center: f64, sigma: f64) -> f64 {
    amplitude * (-0.5 * ((x - center) / sigma).powi(2)).exp()
}

/// Two weakly coupled nuclei whose level ordering follows the Hamming order
/// in both manifolds.
pub fn two_nucleus_config(bias_field: f64) -> SpinSystemConfig {
    let nucleus = |omega0, omega1| NuclearSpinParams {
        omega0,
        omega1,
        tilt: 0.3,
        a_parallel: 0.01,
    };
    SpinSystemConfig {
        zero_field_splitting: 2870.0,
        gyro_electron: 28.0,
        bias_field,
        rabi: 0.01,
        n_nuclei: 2,
        // most significant spin first
        nuclei: vec![nucleus(0.00195, 0.0165), nucleus(0.00165, 0.0105)],
    }
}

/// Member board centred on zero detuning.
pub fn centred_member(config: &SpinSystemConfig, reference_shift: f64) -> GaltonBoard {
    let cb = perturbative_board(config).unwrap();
    assert!(cb.is_lattice_ordered());
    state_conserving_member(&cb, OFF_DIAGONAL_ETA)
        .unwrap()
        .shifted(-reference_shift)
}

pub fn mapping_ensemble(dos: &DosModel) -> DosEnsemble {
    let config = two_nucleus_config(0.0);
    let member = centred_member(&config, config.electron_frequency());
    DosEnsemble::new(member, dos, ENSEMBLE_MEMBERS).unwrap()
}

pub fn sampled_board(dos: &DosModel) -> SingleBoard {
    let cb = sample_board_from_dos(dos, 4, 0.3, Some(7)).unwrap();
    SingleBoard::new(GaltonBoard::from_checkerboard(&cb, 0.1).unwrap())
}

pub fn sweep_template(df: f64, direction: Direction) -> SweepSpec {
    SweepSpec {
        window_start: 0.0,
        window_width: df,
        sweep_rate: 1.0,
        direction,
        n_sweeps: 1,
    }
}

/// Forward and reverse maps over `40..160` MHz in 0.25 MHz steps.
pub fn mapping_maps(ensemble: &DosEnsemble, df: f64) -> (SpectralMapResult, SpectralMapResult) {
    let run = |direction| {
        map_spectrum(
            ensemble,
            (40.0, 160.0),
            0.25,
            &sweep_template(df, direction),
        )
        .unwrap()
    };
    (run(Direction::Forward), run(Direction::Reverse))
}

pub fn map_as_spectrum(map: &SpectralMapResult) -> Spectrum {
    Spectrum::from_xy(&map.frequencies(), &map.values()).unwrap()
}

/// Forward map of an ensemble built at `bias_field`, with detuning measured
/// from the electron frequency at 10 mT.
pub fn slope_map(gyro: f64, bias_field: f64) -> SpectralMapResult {
    let mut config = two_nucleus_config(bias_field);
    config.gyro_electron = gyro;
    let mut reference = config.clone();
    reference.bias_field = 10.0;
    let member = centred_member(&config, reference.electron_frequency());
    let dos = DosModel::gaussian(0.0, MAP_WIDTH).unwrap();
    let ensemble = DosEnsemble::new(member, &dos, ENSEMBLE_MEMBERS).unwrap();
    map_spectrum(
        &ensemble,
        (-60.0, 80.0),
        0.25,
        &sweep_template(2.5, Direction::Forward),
    )
    .unwrap()
}
