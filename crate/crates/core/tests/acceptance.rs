// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::f64::consts::E;
use std::time::Instant;

use galton_dnp::analysis::{fit_biexponential, fit_gaussian, fit_linear, fit_relaxation, Spectrum};
use galton_dnp::engine::dp::dp_sweep_traced;
use galton_dnp::engine::paths::exit_populations_by_paths;
use galton_dnp::engine::{
    analytic_full_sweep, dp_sweep, dp_sweep_with, hyperpolarization, tunneling_probability,
    Direction, GaltonBoard, PopulationVector, SweepOptions,
};
use galton_dnp::sweep::{integrate_dos, DosModel, SpectralSource, SweepSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use common::*;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ac1e);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n_states = 1 << (trial % 3 + 1);
        let board = random_board(&mut rng, n_states);
        let init = random_init(&mut rng, n_states);
        let dp = dp_sweep(&board, &init, None).unwrap();
        let (cols, rows) = board_order_inputs(&board, &init);
        let (bottom, right) = exit_populations_by_paths(&board, &cols, &rows, 1e6).unwrap();
        for (a, b) in dp
            .exit_zero
            .iter()
            .zip(&bottom)
            .chain(dp.exit_plus.iter().zip(&right))
        {
            worst = worst.max((a - b).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-12 && secs < 10.0,
        format!("100 boards N<=3, max |DP - path sum| = {worst:.2e} (tol 1e-12), {secs:.2} s (limit 10 s)"),
    )
}

fn analytic_equivalence() -> Outcome {
    let pairs = [(0.5, 0.5), (0.3, 0.7), (0.7, 0.3), (0.9, 0.1)];
    let mut worst = 0.0f64;
    let mut worst_norm = 0.0f64;
    for n in 2..=8 {
        for &(p, q) in &pairs {
            let m = 1 << n;
            let analytic = analytic_full_sweep(m, p, q).unwrap();
            let board = GaltonBoard::uniform(m, p, q).unwrap();
            let dp = dp_sweep(&board, &PopulationVector::thermal(m), None)
                .unwrap()
                .readout;
            let pairs = analytic
                .manifold0
                .iter()
                .zip(&dp.manifold0)
                .chain(analytic.manifold1.iter().zip(&dp.manifold1));
            for (a, b) in pairs {
                worst = worst.max((a - b).abs());
            }
            worst_norm = worst_norm.max((analytic.total() - 1.0).abs());
        }
    }
    check(
        worst < 1e-10 && worst_norm < 1e-12,
        format!(
            "N=2..8 x (p,q) in {pairs:?}: max |closed form - DP| = {worst:.2e} (tol 1e-10), max |sum - 1| = {worst_norm:.2e} (tol 1e-12)"
        ),
    )
}

fn conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0de);
    let mut worst = 0.0f64;
    let mut updates = 0usize;
    for _ in 0..1000 {
        let n_states = 1 << rng.random_range(1..=4);
        let board = random_board(&mut rng, n_states);
        let init = random_init(&mut rng, n_states);
        let (lo, hi) = board.f_cross_range();
        let window = if rng.random_bool(0.5) {
            let a = rng.random_range(lo..=hi);
            let b = rng.random_range(lo..=hi);
            Some((a.min(b), a.max(b)))
        } else {
            None
        };
        let options = SweepOptions {
            window,
            direction: if rng.random_bool(0.5) {
                Direction::Forward
            } else {
                Direction::Reverse
            },
            record_nodes: false,
        };
        dp_sweep_traced(&board, &init, &options, |_, _, total| {
            worst = worst.max((total - 1.0).abs());
            updates += 1;
        })
        .unwrap();
    }
    check(
        worst < 1e-12,
        format!(
            "1000 random sweeps, {updates} node updates, max |total - 1| = {worst:.2e} (tol 1e-12)"
        ),
    )
}

fn uniform_profiles() -> Outcome {
    let golden = read_golden_profile("uniform_n4_pq05.csv");
    let analytic4 = analytic_full_sweep(16, 0.5, 0.5).unwrap();
    let dp4 = dp_sweep(
        &GaltonBoard::uniform(16, 0.5, 0.5).unwrap(),
        &PopulationVector::thermal(16),
        None,
    )
    .unwrap()
    .readout;
    let diff = |a: &PopulationVector| {
        a.manifold0
            .iter()
            .zip(&golden.manifold0)
            .chain(a.manifold1.iter().zip(&golden.manifold1))
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    };
    let (d_analytic, d_dp) = (diff(&analytic4), diff(&dp4));
    let p4 = hyperpolarization(&analytic4);
    let p8 = hyperpolarization(&analytic_full_sweep(256, 0.5, 0.5).unwrap());
    check(
        p4 > 0.0 && p8 > 0.0 && d_analytic < 1e-12 && d_dp < 1e-12,
        format!(
            "P(N=4) = {p4:.6}, P(N=8) = {p8:.6} (both > 0); N=4 path-oracle golden vs closed form {d_analytic:.1e}, vs DP {d_dp:.1e} (tol 1e-12)"
        ),
    )
}

fn dos_mapping() -> Outcome {
    let start = Instant::now();
    let dos = DosModel::gaussian(MAP_CENTER, MAP_WIDTH).unwrap();
    let ensemble = mapping_ensemble(&dos);
    let mut centers = Vec::new();
    let mut widths = Vec::new();
    let mut flips = 0usize;
    let mut violations = 0usize;
    for &df in &MAP_WINDOWS {
        let (forward, reverse) = mapping_maps(&ensemble, df);
        let fit = fit_gaussian(&map_as_spectrum(&forward), 1).unwrap();
        centers.push(fit.param("center"));
        widths.push(fit.param("sigma"));
        for (a, b) in forward.points.iter().zip(&reverse.points) {
            if a.1.abs() > 1e-12 || b.1.abs() > 1e-12 {
                flips += 1;
                if a.1 * b.1 >= 0.0 {
                    violations += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let center_ok = centers
        .iter()
        .all(|c| (c - MAP_CENTER).abs() <= 0.2 * MAP_WIDTH);
    let width_ok = widths.windows(2).all(|w| w[1] >= w[0]);
    check(
        center_ok && width_ok && violations == 0 && secs < 60.0,
        format!(
            "df = {MAP_WINDOWS:?} MHz: centers {centers:.3?} (DOS {MAP_CENTER} +/- {:.2}), widths {widths:.4?} (nondecreasing: {width_ok}), sign flips failing {violations}/{flips}, {secs:.1} s (limit 60 s)",
            0.2 * MAP_WIDTH
        ),
    )
}

fn zero_dos_null() -> Outcome {
    let dos = DosModel::gaussian(MAP_CENTER, MAP_WIDTH).unwrap();
    let ensemble = mapping_ensemble(&dos);
    let single = sampled_board(&dos);
    let mut windows = 0usize;
    let mut worst = 0.0f64;
    for &df in &MAP_WINDOWS {
        for i in 0..=400 {
            let f0 = -100.0 + 0.75 * i as f64;
            if integrate_dos(&dos, f0, df).unwrap() >= 1e-9 {
                continue;
            }
            windows += 1;
            for direction in [Direction::Forward, Direction::Reverse] {
                let spec = SweepSpec {
                    window_start: f0,
                    window_width: df,
                    sweep_rate: 1.0,
                    direction,
                    n_sweeps: 1,
                };
                worst = worst.max(ensemble.polarization(&spec).unwrap().abs());
                worst = worst.max(single.polarization(&spec).unwrap().abs());
            }
        }
    }
    check(
        windows > 100 && worst < 1e-12,
        format!("{windows} windows with integrated DOS < 1e-9: max |P| = {worst:.1e} (tol 1e-12)"),
    )
}

fn limits() -> Outcome {
    let m = 8;
    let board = GaltonBoard::from_eta_table(m, &vec![1.0; m * m], lattice_crossings(m)).unwrap();
    let p_thermal = hyperpolarization(
        &dp_sweep(&board, &PopulationVector::thermal(m), None)
            .unwrap()
            .readout,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let init = random_init(&mut rng, m);
    let out = dp_sweep_with(&board, &init, &SweepOptions::default())
        .unwrap()
        .readout;
    let identity = out == init;
    let eta0 = tunneling_probability(0.0, 2.5).unwrap();
    let rate: f64 = 0.37;
    let eta1 = tunneling_probability(rate.sqrt(), rate).unwrap();
    let err = (eta1 - 1.0 / E).abs();
    check(
        p_thermal == 0.0 && identity && eta0 == 1.0 && err < 1e-15,
        format!(
            "all-eta=1 board: P = {p_thermal}, identity map {identity}; eta(0) = {eta0}, |eta(gap^2 = rate) - 1/e| = {err:.1e} (tol 1e-15)"
        ),
    )
}

fn fit_round_trips() -> Outcome {
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let mut worst = 0.0f64;

    let x: Vec<f64> = (0..=320).map(|i| 60.0 + 0.25 * i as f64).collect();
    let y: Vec<f64> = x.iter().map(|&x| gauss(x, 1.0, 100.0, 5.0)).collect();
    let g = fit_gaussian(&Spectrum::from_xy(&x, &y).unwrap(), 1).unwrap();
    for (name, truth) in [("amplitude", 1.0), ("center", 100.0), ("sigma", 5.0)] {
        worst = worst.max(rel(g.param(name), truth));
    }

    let t: Vec<f64> = (0..60).map(|i| 0.5 * i as f64).collect();
    let y: Vec<f64> = t
        .iter()
        .map(|&t| 0.4 * (1.0 - (-t / 2.0).exp()) + 0.6 * (1.0 - (-t / 20.0).exp()))
        .collect();
    let b = fit_biexponential(&t, &y).unwrap();
    for (name, truth) in [("a1", 0.4), ("tau1", 2.0), ("a2", 0.6), ("tau2", 20.0)] {
        worst = worst.max(rel(b.param(name), truth));
    }

    let t: Vec<f64> = (0..40).map(|i| 3.0 * i as f64).collect();
    let y: Vec<f64> = t.iter().map(|&t| 0.8 * (-t / 30.0).exp()).collect();
    let d = fit_relaxation(&t, &y).unwrap();
    worst = worst
        .max(rel(d.param("t1"), 30.0))
        .max(rel(d.param("amplitude"), 0.8));

    let x: Vec<f64> = (0..10).map(f64::from).collect();
    let y: Vec<f64> = x.iter().map(|&x| 0.07 * x + 0.3).collect();
    let l = fit_linear(&x, &y).unwrap();
    worst = worst
        .max(rel(l.param("slope"), 0.07))
        .max(rel(l.param("intercept"), 0.3));

    // satellite: 0.02 of the main peak, noise sigma = main amplitude / 100
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let x: Vec<f64> = (0..=1000).map(|i| -150.0 + 0.25 * i as f64).collect();
    let realizations = 200;
    let mut ratio_sum = 0.0;
    for _ in 0..realizations {
        let y: Vec<f64> = x
            .iter()
            .map(|&x| gauss(x, 1.0, 0.0, 5.0) + gauss(x, 0.02, -99.7, 5.0) + noise.sample(&mut rng))
            .collect();
        let fit = fit_gaussian(&Spectrum::from_xy(&x, &y).unwrap(), 2).unwrap();
        ratio_sum += fit.param("amplitude_2") / fit.param("amplitude_1");
    }
    let ratio = ratio_sum / realizations as f64;
    let ratio_err = rel(ratio, 0.02);
    check(
        worst < 1e-6 && ratio_err < 0.05,
        format!(
            "noiseless max relative error {worst:.1e} (tol 1e-6); satellite ratio {ratio:.5} vs 0.02 ({:.2}% , tol 5%) over {realizations} SNR-100 realizations",
            100.0 * ratio_err
        ),
    )
}

fn pipeline_slope() -> Outcome {
    let (gamma, db) = (28.0, 0.5);
    let mut spectra = Vec::new();
    for field in [0.0, db] {
        let map = slope_map(gamma, 10.0 + field);
        spectra.push((field, map_as_spectrum(&map)));
    }
    let centers: Vec<f64> = spectra
        .iter()
        .map(|(_, s)| fit_gaussian(s, 1).unwrap().param("center"))
        .collect();
    let fit = galton_dnp::analysis::center_vs_field(&spectra).unwrap();
    let slope = fit.param("slope");
    let err = ((slope - gamma) / gamma).abs();
    check(
        err < 0.05,
        format!(
            "centers {centers:.3?} at dB = [0, {db}] mT: slope {slope:.4} MHz/mT vs gamma_e {gamma} ({:.3}%, tol 5%)",
            100.0 * err
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("analytic equivalence", analytic_equivalence),
        ("conservation suite", conservation),
        (
            "population profiles and hyperpolarization (N=4, N=8)",
            uniform_profiles,
        ),
        ("DOS-mapping simulation", dos_mapping),
        ("zero-DOS null", zero_dos_null),
        ("diabatic/adiabatic limits", limits),
        ("fit round-trips", fit_round_trips),
        ("center-vs-field slope", pipeline_slope),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = run();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failed += 1;
        }
        println!("[{tag}] {name}: {}", outcome.detail);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
