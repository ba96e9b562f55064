// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use galton_dnp::engine::{Direction, GaltonBoard, PopulationVector};
use galton_dnp::sweep::{
    accumulate_buildup, integrate_dos, map_spectrum, sample_board_from_dos,
    simulate_checkerboard_sweep, BuildupModel, DosModel, SingleBoard, SpectralSource, SweepError,
    SweepSpec,
};
use statrs::distribution::{ContinuousCDF, Normal};

use common::*;

/// Asymptotic Kolmogorov survival function with the Stephens correction.
fn kolmogorov_p(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let sum: f64 = (1..=100)
        .map(|j| {
            let j = j as f64;
            let sign = if j as i64 % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * j * j * lambda * lambda).exp()
        })
        .sum();
    (2.0 * sum).clamp(0.0, 1.0)
}

#[test]
fn sampled_crossings_follow_the_dos() {
    let dos = DosModel::gaussian(100.0, 13.5).unwrap();
    let m = 16;
    let mut samples = Vec::new();
    for seed in 0..700u64 {
        let board = sample_board_from_dos(&dos, m, 0.1, Some(seed)).unwrap();
        // one crossing frequency per row
        samples.extend((1..=m).map(|k| board.node(k, 1).f_cross));
    }
    assert!(samples.len() >= 10_000);
    samples.sort_by(f64::total_cmp);
    let reference = Normal::new(100.0, 13.5).unwrap();
    let n = samples.len();
    let d = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = reference.cdf(x);
            (f - i as f64 / n as f64)
                .abs()
                .max((f - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    let p = kolmogorov_p(d, n);
    assert!(p > 0.01, "KS D = {d}, p = {p}");
}

#[test]
fn sampling_is_reproducible_per_seed() {
    let dos = DosModel::gaussian(0.0, 1.0).unwrap();
    let a = sample_board_from_dos(&dos, 8, 0.1, Some(42)).unwrap();
    let b = sample_board_from_dos(&dos, 8, 0.1, Some(42)).unwrap();
    let c = sample_board_from_dos(&dos, 8, 0.1, Some(43)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn delta_dos_makes_every_crossing_degenerate() {
    let dos = DosModel::gaussian(50.0, 0.0).unwrap();
    let board = sample_board_from_dos(&dos, 4, 0.1, None).unwrap();
    assert!(board.nodes().iter().all(|n| n.f_cross == 50.0));
    assert!(board.degenerate_pairs() > 0);
}

#[test]
fn reversing_the_sweep_flips_the_sign() {
    let dos = DosModel::gaussian(MAP_CENTER, MAP_WIDTH).unwrap();
    let ensemble = mapping_ensemble(&dos);
    let (forward, reverse) = mapping_maps(&ensemble, 2.5);
    let mut nonzero = 0;
    for (a, b) in forward.points.iter().zip(&reverse.points) {
        if a.1 != 0.0 || b.1 != 0.0 {
            nonzero += 1;
            assert!(a.1 * b.1 < 0.0, "f0 = {}: {} vs {}", a.0, a.1, b.1);
        }
    }
    assert!(nonzero > 100);
}

#[test]
fn windows_without_states_leave_populations_unpolarized() {
    let dos = DosModel::gaussian(MAP_CENTER, MAP_WIDTH).unwrap();
    let single = sampled_board(&dos);
    let spec = sweep_template(2.0, Direction::Forward).at(MAP_CENTER - 10.0 * MAP_WIDTH);
    assert!(integrate_dos(&dos, spec.window_start, spec.window_width).unwrap() < 1e-9);
    assert_eq!(single.polarization(&spec).unwrap(), 0.0);
}

#[test]
fn window_over_whole_board_equals_unwindowed_sweep() {
    let dos = DosModel::gaussian(0.0, 5.0).unwrap();
    let cb = sample_board_from_dos(&dos, 4, 0.3, Some(1)).unwrap();
    let (lo, hi) = cb.f_cross_range();
    let spec = SweepSpec {
        window_start: lo - 1.0,
        window_width: hi - lo + 2.0,
        sweep_rate: 0.05,
        direction: Direction::Forward,
        n_sweeps: 1,
    };
    let init = PopulationVector::thermal(4);
    let windowed = simulate_checkerboard_sweep(&cb, &spec, &init).unwrap();
    let board = GaltonBoard::from_checkerboard(&cb, 0.05).unwrap();
    let full = galton_dnp::engine::dp_sweep(&board, &init, None).unwrap();
    assert_eq!(windowed.populations, full.readout);
}

#[test]
fn repeated_sweeps_accumulate_polarization() {
    let board = GaltonBoard::uniform(4, 0.5, 0.5).unwrap();
    let source = SingleBoard::new(board);
    let mut spec = SweepSpec {
        window_start: 0.0,
        window_width: 10.0,
        sweep_rate: 1.0,
        direction: Direction::Forward,
        n_sweeps: 1,
    };
    let once = source.polarization(&spec).unwrap();
    spec.n_sweeps = 5;
    let five = source.polarization(&spec).unwrap();
    assert!(once > 0.0 && five > once);
}

#[test]
fn map_output_is_sorted_and_serializable() {
    let board = GaltonBoard::uniform(4, 0.5, 0.5).unwrap();
    let source = SingleBoard::new(board);
    let map = map_spectrum(
        &source,
        (0.0, 10.0),
        0.5,
        &sweep_template(2.0, Direction::Forward),
    )
    .unwrap();
    assert_eq!(map.points.len(), 21);
    assert!(map.points.windows(2).all(|w| w[0].0 < w[1].0));
    let mut csv = Vec::new();
    map.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("f0,P\n0,"));
    let mut json = Vec::new();
    map.write_metadata(&mut json).unwrap();
    let value: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(value["board"]["n_states"], 4);
}

#[test]
fn buildup_matches_rate_equation() {
    let model = BuildupModel {
        injection_rate: 0.2,
        relaxation: 0.05,
        p_max: 0.4,
    };
    let times: Vec<f64> = (0..200).map(|i| 0.5 * i as f64).collect();
    let p = accumulate_buildup(&model, &times).unwrap();
    // explicit midpoint integration of dP/dt = r (Pmax - P) - Gamma1 P
    let (mut state, dt) = (0.0f64, 1e-4);
    let rhs = |p: f64| 0.2 * (0.4 - p) - 0.05 * p;
    let mut steps = 0u64;
    for (&ti, &pi) in times.iter().zip(&p) {
        while (steps as f64) < (ti / dt).round() {
            let half = state + 0.5 * dt * rhs(state);
            state += dt * rhs(half);
            steps += 1;
        }
        assert!((state - pi).abs() < 1e-8, "t = {ti}: {state} vs {pi}");
    }
    assert!((p[199] - model.steady_state()).abs() < 1e-3);
    assert!(matches!(
        accumulate_buildup(&model, &[1.0, 0.5]),
        Err(SweepError::InvalidTimes)
    ));
}
