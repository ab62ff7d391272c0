// Copyright 2026 The zeno Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(zeno::cli::main_with_args(std::env::args_os()));
}
