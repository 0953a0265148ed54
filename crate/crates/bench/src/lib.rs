// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Benchmark-only package. The benchmarks live in `benches/`.
