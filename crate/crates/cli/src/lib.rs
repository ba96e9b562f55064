// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end for `galton-dnp`.
//!
//! Each subcommand writes its artifacts plus a `manifest.json` (input hashes,
//! seed, versions, output hashes) into the output directory. Failures print a
//! JSON error object on stderr and exit with 1 (invalid input) or 2
//! (numerical failure).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
pub mod options;
pub mod plot;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use galton_dnp::analysis::AnalysisError;
use galton_dnp::engine::EngineError;
use galton_dnp::io::IoError;
use galton_dnp::spin_model::SpinModelError;
use galton_dnp::sweep::SweepError;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use options::{Cli, Format, Merge, RunFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    /// Bad flags, config or input files. Exit code 1.
    Validation,
    /// A computation failed or missed its tolerance. Exit code 2.
    Numerical,
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Numerical,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Validation => 1,
            ErrorKind::Numerical => 2,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": { "kind": self.kind, "message": self.message },
            "exit_code": self.exit_code(),
        })
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::NotNormalized(_) => Self::numerical(e.to_string()),
            _ => Self::validation(e.to_string()),
        }
    }
}

impl From<SpinModelError> for CliError {
    fn from(e: SpinModelError) -> Self {
        match e {
            SpinModelError::CrossingNotFound { .. }
            | SpinModelError::MinimizationDiverged { .. }
            | SpinModelError::NegativeGap { .. } => Self::numerical(e.to_string()),
            _ => Self::validation(e.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Engine(e) => e.into(),
            SweepError::SpinModel(e) => e.into(),
            other => Self::validation(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::NoConvergence(_) => Self::numerical(e.to_string()),
            _ => Self::validation(e.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self::validation(e.to_string())
    }
}

impl From<plot::PlotError> for CliError {
    fn from(e: plot::PlotError) -> Self {
        Self::validation(e.to_string())
    }
}

/// Everything a subcommand needs besides its own options.
pub(crate) struct Context {
    pub seed: u64,
    pub format: Format,
    pub out: PathBuf,
    pub file: RunFile,
    inputs: Vec<(String, String)>,
    outputs: Vec<(String, String)>,
}

impl Context {
    /// Read an input file and record its hash.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        self.inputs
            .push((path.display().to_string(), sha256(&bytes)));
        Ok(bytes)
    }

    /// Write an artifact into the output directory and record its hash.
    pub fn write_output(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.out.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push((name.to_string(), sha256(bytes)));
        Ok(())
    }

    pub fn table_name(&self, stem: &str) -> String {
        match self.format {
            Format::Csv => format!("{stem}.csv"),
            Format::Json => format!("{stem}.json"),
        }
    }
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("GALTON_DNP_LOG", "warn");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

/// Parse `args` (including the program name), run the command and return
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = CliError::validation(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<serde_json::Value, CliError> {
    let mut config_input = None;
    let file = match &cli.config {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| {
                CliError::validation(format!("cannot read {}: {e}", path.display()))
            })?;
            let file: RunFile = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
            config_input = Some((path.display().to_string(), sha256(&bytes)));
            file
        }
        None => RunFile::default(),
    };
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let jobs = cli.jobs.or(file.jobs);
    let out = cli
        .out
        .clone()
        .or(file.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let format = cli.format.or(file.format).unwrap_or_default();
    if jobs == Some(0) {
        return Err(CliError::validation("--jobs must be at least 1"));
    }
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::validation(format!("cannot create {}: {e}", out.display())))?;

    let command = cli.command;
    let name = command.name();
    let mut ctx = Context {
        seed,
        format,
        out,
        file,
        inputs: config_input.into_iter().collect(),
        outputs: Vec::new(),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::validation(format!("thread pool: {e}")))?;
    log::info!("running {name} with seed {seed}");
    let result = pool.install(|| run_command(command, &mut ctx));

    let (status, effective, summary, error) = match &result {
        Ok((effective, summary)) => ("ok", effective.clone(), summary.clone(), None),
        Err(e) => (
            "error",
            serde_json::Value::Null,
            serde_json::Value::Null,
            Some(e.to_json()),
        ),
    };
    let manifest = json!({
        "command": name,
        "status": status,
        "seed": seed,
        "format": format,
        "versions": {
            "galton-dnp": galton_dnp::VERSION,
            "galton-dnp-cli": env!("CARGO_PKG_VERSION"),
        },
        "inputs": ctx.inputs.iter().map(|(p, h)| json!({"path": p, "sha256": h})).collect::<Vec<_>>(),
        "inputs_sha256": sha256(
            &serde_json::to_vec(&json!({"options": effective, "inputs": ctx.inputs})).unwrap_or_default()
        ),
        "options": effective,
        "outputs": ctx.outputs.iter().map(|(p, h)| json!({"file": p, "sha256": h})).collect::<Vec<_>>(),
        "summary": summary,
        "error": error,
    });
    let text = serde_json::to_string_pretty(&manifest).unwrap_or_default() + "\n";
    // best effort on failure paths; the error itself is what gets reported
    let written = std::fs::write(ctx.out.join("manifest.json"), text);
    let (_, summary) = result?;
    written.map_err(|e| CliError::validation(format!("cannot write manifest: {e}")))?;
    Ok(summary)
}

fn run_command(
    command: options::Command,
    ctx: &mut Context,
) -> Result<(serde_json::Value, serde_json::Value), CliError> {
    use options::Command as C;
    let file = ctx.file.clone();
    match command {
        C::Levels(a) => commands::levels(a.merge(file.levels), ctx),
        C::Board(a) => commands::board(a.merge(file.board), ctx),
        C::Sweep(a) => commands::sweep(a.merge(file.sweep), ctx),
        C::Spectrum(a) => commands::spectrum(a.merge(file.spectrum), ctx),
        C::Buildup(a) => commands::buildup(a.merge(file.buildup), ctx),
        C::Fit(a) => commands::fit(a.merge(file.fit), ctx),
        C::OracleCheck(a) => commands::oracle_check(a.merge(file.oracle_check), ctx),
    }
}
