// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use galton_dnp::analysis::{
    fit_biexponential, fit_gaussian, fit_linear, fit_relaxation, short_time_rate, FitResult,
    Spectrum,
};
use galton_dnp::engine::paths::exit_populations_by_paths;
use galton_dnp::engine::{
    dp_sweep, tunneling_probability, Direction, GaltonBoard, PopulationVector,
};
use galton_dnp::io;
use galton_dnp::spin_model::{
    build_levels, locate_lacs, perturbative_board, Checkerboard, NuclearSpinParams,
    SpinSystemConfig,
};
use galton_dnp::sweep::{
    accumulate_buildup, map_spectrum, sample_board_from_dos, simulate_window_sweep,
    state_conserving_member, BuildupModel, DosEnsemble, DosModel, SingleBoard, SpectralSource,
    SweepSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::options::{
    BoardArgs, BuildupArgs, DosChoice, FitArgs, FitChoice, Format, LevelsArgs, OracleArgs,
    SourceChoice, SpectrumArgs, SweepArgs, SweepDirection,
};
use crate::plot::{emit_plot, PlotStyle, Series};
use crate::{CliError, Context};

type Outcome = Result<(Value, Value), CliError>;

/// Largest difference tolerated by `oracle-check`.
const ORACLE_TOLERANCE: f64 = 1e-12;

/// Two nuclei with Hamming-ordered levels in both manifolds, driven weakly
/// enough that every anti-crossing is isolated.
fn default_system() -> SpinSystemConfig {
    let nucleus = |omega0, omega1| NuclearSpinParams {
        omega0,
        omega1,
        tilt: 0.3,
        a_parallel: 0.01,
    };
    SpinSystemConfig {
        zero_field_splitting: 2870.0,
        gyro_electron: 28.0,
        bias_field: 0.0,
        rabi: 2e-5,
        n_nuclei: 2,
        nuclei: vec![nucleus(0.00195, 0.0165), nucleus(0.00165, 0.0105)],
    }
}

fn system(ctx: &Context) -> SpinSystemConfig {
    ctx.file.system.clone().unwrap_or_else(default_system)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes =
        serde_json::to_vec_pretty(v).map_err(|e| CliError::validation(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), CliError>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn direction(d: Option<SweepDirection>) -> Direction {
    match d {
        Some(SweepDirection::Reverse) => Direction::Reverse,
        _ => Direction::Forward,
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::validation(format!(
            "--{name} must be positive, got {v}"
        )))
    }
}

fn spins_to_states(name: &str, n: usize) -> Result<usize, CliError> {
    if (1..=20).contains(&n) {
        Ok(1 << n)
    } else {
        Err(CliError::validation(format!(
            "--{name} must lie in 1..=20, got {n}"
        )))
    }
}

fn gap_board(system: &SpinSystemConfig, exact: bool) -> Result<Checkerboard, CliError> {
    Ok(if exact {
        locate_lacs(system)?
    } else {
        perturbative_board(system)?
    })
}

pub fn levels(a: LevelsArgs, ctx: &mut Context) -> Outcome {
    let system = system(ctx);
    system.validate()?;
    let fe = system.electron_frequency();
    let span: f64 = 2.0 * system.rabi
        + system
            .nuclei
            .iter()
            .map(|n| n.omega0.abs() + n.omega1.abs())
            .sum::<f64>();
    let f_min = a.f_min.unwrap_or(fe - span);
    let f_max = a.f_max.unwrap_or(fe + span);
    let points = a.points.unwrap_or(201);
    if points < 2 || !(f_max > f_min) {
        return Err(CliError::validation(
            "need f_max > f_min and at least 2 points",
        ));
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| f_min + (f_max - f_min) * i as f64 / (points - 1) as f64)
        .collect();
    let diagram = build_levels(&system, &grid)?;
    let table = match ctx.format {
        Format::Csv => csv_bytes(|b| Ok(io::write_levels(&diagram, b)?))?,
        Format::Json => json_bytes(&diagram)?,
    };
    ctx.write_output(&ctx.table_name("levels"), &table)?;

    let m = system.n_states();
    let mut series = Vec::with_capacity(2 * m);
    for (label, energies) in [
        ("m_s=0", &diagram.energies0),
        ("m_s=+1", &diagram.energies1),
    ] {
        for j in 0..m {
            let pts = grid.iter().zip(energies).map(|(&f, e)| (f, e[j])).collect();
            series.push(Series::line(format!("{label} #{}", j + 1), pts));
        }
    }
    let style = PlotStyle {
        title: "Rotating-frame energy levels".into(),
        x_label: "microwave frequency (MHz)".into(),
        y_label: "energy (MHz)".into(),
        ..PlotStyle::default()
    };
    ctx.write_output("levels.svg", emit_plot(&series, &style)?.as_bytes())?;
    let effective = json!({"system": system, "f_min": f_min, "f_max": f_max, "points": points});
    Ok((effective, json!({"levels": 2 * m, "points": points})))
}

#[derive(Serialize)]
struct BoardRow {
    k: usize,
    l: usize,
    f_cross: f64,
    gap: f64,
    eta: f64,
}

pub fn board(a: BoardArgs, ctx: &mut Context) -> Outcome {
    let system = system(ctx);
    let rate = positive("rate", a.rate.unwrap_or(system.rabi * system.rabi))?;
    let exact = a.exact.unwrap_or(false);
    let cb = gap_board(&system, exact)?;
    let table = match ctx.format {
        Format::Csv => csv_bytes(|b| Ok(io::write_checkerboard(&cb, rate, b)?))?,
        Format::Json => {
            let rows = cb
                .nodes()
                .iter()
                .map(|n| {
                    Ok(BoardRow {
                        k: n.k,
                        l: n.l,
                        f_cross: n.f_cross,
                        gap: n.gap,
                        eta: tunneling_probability(n.gap, rate)?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            json_bytes(&json!({
                "row_state": cb.row_state(),
                "col_state": cb.col_state(),
                "nodes": rows,
            }))?
        }
    };
    ctx.write_output(&ctx.table_name("board"), &table)?;
    let (lo, hi) = cb.f_cross_range();
    let effective = json!({"system": system, "rate": rate, "exact": exact});
    let summary = json!({
        "n_states": cb.n_states(),
        "f_cross_min": lo,
        "f_cross_max": hi,
        "lattice_ordered": cb.is_lattice_ordered(),
        "degenerate_pairs": cb.degenerate_pairs(),
    });
    Ok((effective, summary))
}

pub fn sweep(a: SweepArgs, ctx: &mut Context) -> Outcome {
    let n_sweeps = a.n_sweeps.unwrap_or(1);
    let system = system(ctx);
    // by default the fastest state-conserving passage has eta = 1/e
    let rate = positive("rate", a.rate.unwrap_or(system.rabi * system.rabi))?;
    let (board, source) = match a.uniform {
        Some(p) => {
            let n = a.n.unwrap_or(4);
            let m = spins_to_states("n", n)?;
            (
                GaltonBoard::uniform(m, p, 1.0 - p)?,
                json!({"uniform": p, "n": n}),
            )
        }
        None => {
            let exact = a.exact.unwrap_or(false);
            let cb = gap_board(&system, exact)?;
            let board = GaltonBoard::from_checkerboard(&cb, rate)?;
            (
                board,
                json!({"system": system, "exact": exact, "rate": rate}),
            )
        }
    };
    let (lo, hi) = board.f_cross_range();
    let f0 = a.f0.unwrap_or(lo - 0.5);
    let df = a.df.unwrap_or(hi - lo + 1.0);
    let spec = SweepSpec {
        window_start: f0,
        window_width: df,
        sweep_rate: rate,
        direction: direction(a.sweep),
        n_sweeps,
    };
    let m = board.n_states();
    let result = simulate_window_sweep(&board, &spec, &PopulationVector::thermal(m))?;
    let table = match ctx.format {
        Format::Csv => csv_bytes(|b| Ok(io::write_populations(&result.populations, b)?))?,
        Format::Json => json_bytes(&result.populations)?,
    };
    ctx.write_output(&ctx.table_name("populations"), &table)?;

    let profile = |v: &[f64]| {
        v.iter()
            .enumerate()
            .map(|(i, &p)| ((i + 1) as f64, p))
            .collect()
    };
    let series = [
        Series::points("m_s=0", profile(&result.populations.manifold0)),
        Series::points("m_s=+1", profile(&result.populations.manifold1)),
    ];
    let style = PlotStyle {
        title: format!("Populations, P = {:.4}", result.polarization),
        x_label: "Hamming index".into(),
        y_label: "population".into(),
        ..PlotStyle::default()
    };
    ctx.write_output("populations.svg", emit_plot(&series, &style)?.as_bytes())?;
    let effective = json!({"board": source, "spec": spec});
    let summary = json!({
        "polarization": result.polarization,
        "suppressed": result.suppressed,
        "window_empty": result.window_empty,
    });
    Ok((effective, summary))
}

fn gaussian_curve(fit: &FitResult, peaks: usize, xs: &[f64]) -> Vec<(f64, f64)> {
    let names: Vec<String> = if peaks == 1 {
        vec![String::new()]
    } else {
        (1..=peaks).map(|i| format!("_{i}")).collect()
    };
    xs.iter()
        .map(|&x| {
            let y = names
                .iter()
                .map(|s| {
                    let (a, c, w) = (
                        fit.param(&format!("amplitude{s}")),
                        fit.param(&format!("center{s}")),
                        fit.param(&format!("sigma{s}")),
                    );
                    a * (-0.5 * ((x - c) / w).powi(2)).exp()
                })
                .sum();
            (x, y)
        })
        .collect()
}

pub fn spectrum(a: SpectrumArgs, ctx: &mut Context) -> Outcome {
    let dos = match a.dos.unwrap_or(DosChoice::Gaussian) {
        DosChoice::Gaussian => {
            DosModel::gaussian(a.center.unwrap_or(100.0), a.width.unwrap_or(13.5))?
        }
        DosChoice::Table => {
            let path = a
                .table
                .clone()
                .ok_or_else(|| CliError::validation("--dos table needs --table <csv>"))?;
            let bytes = ctx.read_input(&path)?;
            DosModel::tabulated(io::read_xy(bytes.as_slice())?.points)?
        }
    };
    let df = positive("df", a.df.unwrap_or(2.5))?;
    let step = positive("step", a.step.unwrap_or(0.25))?;
    let reach = (4.0 * dos.width).max(5.0);
    let f_min = a.f_min.unwrap_or(dos.center - reach - df);
    let f_max = a.f_max.unwrap_or(dos.center + reach);
    let rate = positive("rate", a.rate.unwrap_or(0.1))?;
    let template = SweepSpec {
        window_start: f_min,
        window_width: df,
        sweep_rate: rate,
        direction: direction(a.sweep),
        n_sweeps: a.n_sweeps.unwrap_or(1),
    };
    let source_kind = a.source.unwrap_or(SourceChoice::Ensemble);
    let (source, source_opts): (Box<dyn SpectralSource>, Value) = match source_kind {
        SourceChoice::Ensemble => {
            let system = system(ctx);
            let eta = a.eta.unwrap_or(0.5);
            let members = a.members.unwrap_or(256);
            let cb = perturbative_board(&system)?;
            let member = state_conserving_member(&cb, eta)?.shifted(-system.electron_frequency());
            let opts =
                json!({"source": "ensemble", "system": system, "eta": eta, "members": members});
            (Box::new(DosEnsemble::new(member, &dos, members)?), opts)
        }
        SourceChoice::Sampled => {
            let n = a.n.unwrap_or(4);
            let m = spins_to_states("n", n)?;
            let gap_scale = a.gap_scale.unwrap_or(0.3);
            let cb = sample_board_from_dos(&dos, m, gap_scale, Some(ctx.seed))?;
            let board = GaltonBoard::from_checkerboard(&cb, rate)?;
            let opts = json!({"source": "sampled", "n": n, "gap_scale": gap_scale});
            (Box::new(SingleBoard::new(board)), opts)
        }
    };
    let mut map = map_spectrum(source.as_ref(), (f_min, f_max), step, &template)?;
    map.metadata.dos = Some(dos.clone());
    map.metadata.seed = Some(ctx.seed);

    match ctx.format {
        Format::Csv => {
            let table = csv_bytes(|b| Ok(map.write_csv(b)?))?;
            ctx.write_output("spectrum.csv", &table)?;
            let meta = csv_bytes(|b| Ok(map.write_metadata(b)?))?;
            ctx.write_output("spectrum.meta.json", &meta)?;
        }
        Format::Json => ctx.write_output("spectrum.json", &json_bytes(&map)?)?,
    }

    let mut series = vec![Series::points("simulated P", map.points.clone())];
    let spec = Spectrum::from_xy(&map.frequencies(), &map.values())?;
    let fit = match fit_gaussian(&spec, 1) {
        Ok(fit) => {
            series.push(Series::line(
                "Gaussian fit",
                gaussian_curve(&fit, 1, &map.frequencies()),
            ));
            Some(fit)
        }
        Err(e) => {
            log::warn!("no Gaussian fit for the map: {e}");
            None
        }
    };
    let style = PlotStyle {
        title: "Spectral map".into(),
        x_label: "window start f0 (MHz)".into(),
        y_label: "polarization P".into(),
        ..PlotStyle::default()
    };
    ctx.write_output("spectrum.svg", emit_plot(&series, &style)?.as_bytes())?;

    let effective = json!({
        "dos": dos,
        "spec": template,
        "f_min": f_min,
        "f_max": f_max,
        "step": step,
        "board": source_opts,
    });
    let positive_region = map
        .points
        .iter()
        .filter(|p| p.1 > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.0), hi.max(p.0))
        });
    let summary = json!({
        "points": map.points.len(),
        "positive_region": if positive_region.0 <= positive_region.1 {
            json!([positive_region.0, positive_region.1])
        } else {
            Value::Null
        },
        "fit": fit.map(|f| json!({
            "center": f.param("center"),
            "sigma": f.param("sigma"),
            "amplitude": f.param("amplitude"),
        })),
    });
    Ok((effective, summary))
}

pub fn buildup(a: BuildupArgs, ctx: &mut Context) -> Outcome {
    let model = BuildupModel {
        injection_rate: a.injection_rate.unwrap_or(0.1),
        relaxation: a.relaxation.unwrap_or(1.0 / 30.0),
        p_max: a.p_max.unwrap_or(1.0),
    };
    let t_max = positive("t-max", a.t_max.unwrap_or(200.0))?;
    let points = a.points.unwrap_or(201);
    if points < 2 {
        return Err(CliError::validation("--points must be at least 2"));
    }
    let times: Vec<f64> = (0..points)
        .map(|i| t_max * i as f64 / (points - 1) as f64)
        .collect();
    let values = accumulate_buildup(&model, &times)?;
    let table = match ctx.format {
        Format::Csv => csv_bytes(|b| Ok(io::write_xy(["t", "P"], &times, &values, b)?))?,
        Format::Json => json_bytes(&json!({"t": times, "P": values}))?,
    };
    ctx.write_output(&ctx.table_name("buildup"), &table)?;
    let series = [Series::line(
        "P(t)",
        times.iter().copied().zip(values.iter().copied()).collect(),
    )];
    let style = PlotStyle {
        title: "Polarization buildup".into(),
        x_label: "time (s)".into(),
        y_label: "polarization".into(),
        ..PlotStyle::default()
    };
    ctx.write_output("buildup.svg", emit_plot(&series, &style)?.as_bytes())?;
    let effective = json!({"model": model, "t_max": t_max, "points": points});
    let summary = json!({
        "steady_state": model.steady_state(),
        "initial_slope": model.initial_slope(),
    });
    Ok((effective, summary))
}

/// Dense `x` grid spanning the data, for drawing fitted curves.
fn dense(x: &[f64]) -> Vec<f64> {
    let (lo, hi) = (x[0], x[x.len() - 1]);
    (0..=400)
        .map(|i| lo + (hi - lo) * f64::from(i) / 400.0)
        .collect()
}

pub fn fit(a: FitArgs, ctx: &mut Context) -> Outcome {
    let path = a
        .input
        .clone()
        .ok_or_else(|| CliError::validation("fit needs --input <csv>"))?;
    let bytes = ctx.read_input(&path)?;
    let data = io::read_xy(bytes.as_slice())?;
    let (x, y) = (data.x(), data.y());
    if x.is_empty() {
        return Err(CliError::validation(format!(
            "{} has no data rows",
            path.display()
        )));
    }
    let model = a.model.unwrap_or(FitChoice::Gaussian);
    let peaks = a.peaks.unwrap_or(1);
    let grid = dense(&x);
    let (report, curve): (Value, Vec<(f64, f64)>) = match model {
        FitChoice::Gaussian => {
            let fit = fit_gaussian(&data, peaks)?;
            let curve = gaussian_curve(&fit, peaks, &grid);
            (to_value(&fit), curve)
        }
        FitChoice::Biexponential => {
            let fit = fit_biexponential(&x, &y)?;
            let p = |n: &str| fit.param(n);
            let curve = grid
                .iter()
                .map(|&t| {
                    let v = p("a1") * (1.0 - (-t / p("tau1")).exp())
                        + p("a2") * (1.0 - (-t / p("tau2")).exp());
                    (t, v)
                })
                .collect();
            (to_value(&fit), curve)
        }
        FitChoice::Relaxation => {
            let fit = fit_relaxation(&x, &y)?;
            let (a0, rate) = (fit.param("amplitude"), fit.param("rate"));
            let curve = grid.iter().map(|&t| (t, a0 * (-rate * t).exp())).collect();
            (to_value(&fit), curve)
        }
        FitChoice::Linear => {
            let fit = fit_linear(&x, &y)?;
            let (c, s) = (fit.param("intercept"), fit.param("slope"));
            let curve = grid.iter().map(|&t| (t, c + s * t)).collect();
            (to_value(&fit), curve)
        }
        FitChoice::Rate => {
            let est = short_time_rate(&x, &y, a.t_max)?;
            let t_end = a
                .t_max
                .unwrap_or(galton_dnp::analysis::DEFAULT_SHORT_TIME_LIMIT)
                .min(x[x.len() - 1]);
            let curve = grid
                .iter()
                .filter(|&&t| t <= t_end)
                .map(|&t| (t, est.intercept + est.rate * t))
                .collect();
            (to_value(&est), curve)
        }
    };
    ctx.write_output("fit.json", &json_bytes(&report)?)?;
    let series = [
        Series::points("data", data.points.clone()),
        Series::line("fit", curve),
    ];
    let style = PlotStyle {
        title: format!("{model:?} fit"),
        ..PlotStyle::default()
    };
    ctx.write_output("fit.svg", emit_plot(&series, &style)?.as_bytes())?;
    let effective = json!({"input": path, "model": model, "peaks": peaks, "t_max": a.t_max});
    Ok((effective, report))
}

/// Random Landau-Zener board with lattice-ordered crossings.
fn random_board(
    rng: &mut ChaCha8Rng,
    m: usize,
) -> Result<(GaltonBoard, PopulationVector), CliError> {
    let mut a: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..10.0)).collect();
    let mut b: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..10.0)).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let f_cross = a
        .iter()
        .flat_map(|ak| b.iter().map(move |bl| ak + bl))
        .collect();
    let etas: Vec<f64> = (0..m * m).map(|_| rng.random_range(0.0..=1.0)).collect();
    let board = GaltonBoard::from_eta_table(m, &etas, f_cross)?;
    let raw: Vec<f64> = (0..2 * m).map(|_| rng.random_range(0.0..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let init = PopulationVector::new(
        raw[..m].iter().map(|v| v / total).collect(),
        raw[m..].iter().map(|v| v / total).collect(),
    )?;
    Ok((board, init))
}

fn oracle_trial(seed: u64, trial: usize, n_max: usize) -> Result<(usize, f64), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let n = trial % n_max + 1;
    let m = 1 << n;
    let (board, init) = random_board(&mut rng, m)?;
    let dp = dp_sweep(&board, &init, None)?;
    let cols: Vec<f64> = board
        .col_state()
        .iter()
        .map(|&s| init.manifold0[s - 1])
        .collect();
    let rows: Vec<f64> = board
        .row_state()
        .iter()
        .map(|&s| init.manifold1[s - 1])
        .collect();
    let (bottom, right) = exit_populations_by_paths(&board, &cols, &rows, 1e7)?;
    let diff = dp
        .exit_zero
        .iter()
        .zip(&bottom)
        .chain(dp.exit_plus.iter().zip(&right))
        .fold(0.0f64, |d, (a, b)| d.max((a - b).abs()));
    Ok((n, diff))
}

pub fn oracle_check(a: OracleArgs, ctx: &mut Context) -> Outcome {
    let n_max = a.n.unwrap_or(3);
    let trials = a.trials.unwrap_or(100);
    if !(1..=3).contains(&n_max) {
        return Err(CliError::validation(
            "--n must lie in 1..=3; larger boards have too many paths to enumerate",
        ));
    }
    if trials == 0 {
        return Err(CliError::validation("--trials must be at least 1"));
    }
    let seed = ctx.seed;
    let results = (0..trials)
        .into_par_iter()
        .map(|t| oracle_trial(seed, t, n_max))
        .collect::<Result<Vec<_>, _>>()?;
    let mut by_n: BTreeMap<usize, f64> = BTreeMap::new();
    for &(n, d) in &results {
        let e = by_n.entry(n).or_insert(0.0);
        *e = e.max(d);
    }
    let max_diff = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let pass = max_diff < ORACLE_TOLERANCE;
    let report = json!({
        "trials": trials,
        "n_max": n_max,
        "max_abs_diff": max_diff,
        "max_abs_diff_by_n": by_n,
        "tolerance": ORACLE_TOLERANCE,
        "pass": pass,
        "seed": seed,
    });
    ctx.write_output("oracle.json", &json_bytes(&report)?)?;
    if !pass {
        return Err(CliError::numerical(format!(
            "max |DP - path sum| = {max_diff:e} exceeds {ORACLE_TOLERANCE:e}"
        )));
    }
    Ok((json!({"n": n_max, "trials": trials}), report))
}
