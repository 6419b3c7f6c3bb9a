// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Criterion benchmarks for `qntk-core`; see `benches/kernels.rs`.
