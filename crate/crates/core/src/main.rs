// Copyright 2026 The povmsim Developers
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(povmsim::cli::run(std::env::args_os()));
}
