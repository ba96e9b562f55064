// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Landau-Zener "Galton board" model of swept-microwave dynamic nuclear
//! polarization.
//!
//! * [`spin_model`] builds the electron-nuclear level diagram and its grid of
//!   anti-crossings.
//! * [`engine`] pushes nuclear populations through that grid.
//! * [`sweep`] runs windowed sweeps over a density of electronic states and
//!   produces spectral maps.
//! * [`analysis`] fits spectra, buildup and decay curves.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod engine;
pub mod io;
pub mod spin_model;
pub mod sweep;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
