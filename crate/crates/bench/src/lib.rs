// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Benchmarks live in `benches/`; run them with `cargo bench -p ionpulse-bench`.
