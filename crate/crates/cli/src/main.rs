// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(qntk_cli::main_with_args(std::env::args_os()));
}
