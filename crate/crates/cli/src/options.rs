// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line flags and the optional JSON run file. Every option can be
//! set in either place; a flag wins over the file, the file over the
//! built-in default.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use galton_dnp::spin_model::SpinSystemConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepDirection {
    Forward,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DosChoice {
    Gaussian,
    Table,
}

/// What gets swept across the spectral map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceChoice {
    /// One member board replicated across the density of states.
    Ensemble,
    /// One board whose levels are drawn from the density of states.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitChoice {
    Gaussian,
    Biexponential,
    Relaxation,
    Linear,
    Rate,
}

#[derive(Debug, Parser)]
#[command(
    name = "galton-dnp",
    version,
    about = "Landau-Zener Galton-board DNP simulator"
)]
pub struct Cli {
    /// JSON run file with defaults for any option.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels of both electronic manifolds against microwave frequency.
    Levels(LevelsArgs),
    /// Anti-crossing grid with gaps and tunneling probabilities.
    Board(BoardArgs),
    /// One windowed sweep from the thermal state.
    Sweep(SweepArgs),
    /// Polarization map against window position.
    Spectrum(SpectrumArgs),
    /// Polarization buildup curve.
    Buildup(BuildupArgs),
    /// Fit a model to an `x,y[,sigma]` CSV file.
    Fit(FitArgs),
    /// Compare the sweep recursion against path enumeration on random boards.
    OracleCheck(OracleArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Levels(_) => "levels",
            Command::Board(_) => "board",
            Command::Sweep(_) => "sweep",
            Command::Spectrum(_) => "spectrum",
            Command::Buildup(_) => "buildup",
            Command::Fit(_) => "fit",
            Command::OracleCheck(_) => "oracle-check",
        }
    }
}

/// Field-wise `flag.or(file)`.
pub trait Merge {
    fn merge(self, file: Self) -> Self;
}

macro_rules! mergeable {
    ($name:ident { $($field:ident),* $(,)? }) => {
        impl Merge for $name {
            fn merge(self, file: Self) -> Self {
                Self { $($field: self.$field.or(file.$field)),* }
            }
        }
    };
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelsArgs {
    /// Lowest microwave frequency (MHz).
    #[arg(long)]
    pub f_min: Option<f64>,
    /// Highest microwave frequency (MHz).
    #[arg(long)]
    pub f_max: Option<f64>,
    /// Grid points.
    #[arg(long)]
    pub points: Option<usize>,
}
mergeable!(LevelsArgs {
    f_min,
    f_max,
    points
});

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoardArgs {
    /// Sweep rate (MHz^2) used for the tunneling probabilities.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Minimise the exact eigen-gap instead of using first-order gaps.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exact: Option<bool>,
}
mergeable!(BoardArgs { rate, exact });

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepArgs {
    /// Use the uniform board with right-move probability P instead of the
    /// spin system.
    #[arg(long)]
    pub uniform: Option<f64>,
    /// Number of nuclear spins for the uniform board.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exact: Option<bool>,
    /// Window start (MHz); default covers the whole board.
    #[arg(long)]
    pub f0: Option<f64>,
    /// Window width (MHz).
    #[arg(long)]
    pub df: Option<f64>,
    #[arg(long, value_enum)]
    pub sweep: Option<SweepDirection>,
    #[arg(long)]
    pub n_sweeps: Option<usize>,
}
mergeable!(SweepArgs {
    uniform,
    n,
    rate,
    exact,
    f0,
    df,
    sweep,
    n_sweeps
});

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumArgs {
    #[arg(long, value_enum)]
    pub dos: Option<DosChoice>,
    /// Gaussian center (MHz).
    #[arg(long)]
    pub center: Option<f64>,
    /// Gaussian standard deviation (MHz).
    #[arg(long)]
    pub width: Option<f64>,
    /// `frequency,density` CSV for `--dos table`.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Window width (MHz).
    #[arg(long)]
    pub df: Option<f64>,
    #[arg(long, value_enum)]
    pub sweep: Option<SweepDirection>,
    #[arg(long)]
    pub f_min: Option<f64>,
    #[arg(long)]
    pub f_max: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, value_enum)]
    pub source: Option<SourceChoice>,
    /// Ensemble size.
    #[arg(long)]
    pub members: Option<usize>,
    /// Tunneling probability at crossings that change the nuclear state.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Nuclear spins of a sampled board.
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest gap of a sampled board (MHz).
    #[arg(long)]
    pub gap_scale: Option<f64>,
    /// Sweep rate of a sampled board (MHz^2).
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub n_sweeps: Option<usize>,
}
mergeable!(SpectrumArgs {
    dos,
    center,
    width,
    table,
    df,
    sweep,
    f_min,
    f_max,
    step,
    source,
    members,
    eta,
    n,
    gap_scale,
    rate,
    n_sweeps,
});

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildupArgs {
    /// Injection rate (1/s).
    #[arg(long)]
    pub injection_rate: Option<f64>,
    /// Nuclear relaxation rate (1/s).
    #[arg(long)]
    pub relaxation: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
    /// Last time point (s).
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}
mergeable!(BuildupArgs {
    injection_rate,
    relaxation,
    p_max,
    t_max,
    points
});

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitArgs {
    /// `x,y[,sigma]` CSV with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<FitChoice>,
    /// Number of Gaussian peaks.
    #[arg(long)]
    pub peaks: Option<usize>,
    /// Upper time limit of the short-time rate fit (s).
    #[arg(long)]
    pub t_max: Option<f64>,
}
mergeable!(FitArgs {
    input,
    model,
    peaks,
    t_max
});

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleArgs {
    /// Largest number of nuclear spins (at most 3); boards cycle through 1..=n.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
}
mergeable!(OracleArgs { n, trials });

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunFile {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub system: Option<SpinSystemConfig>,
    pub levels: LevelsArgs,
    pub board: BoardArgs,
    pub sweep: SweepArgs,
    pub spectrum: SpectrumArgs,
    pub buildup: BuildupArgs,
    pub fit: FitArgs,
    #[serde(rename = "oracle-check")]
    pub oracle_check: OracleArgs,
}
