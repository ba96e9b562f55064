// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(galton_dnp_cli::run(std::env::args_os()));
}
