// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Error type shared by every module of the library.

use num_complex::Complex64;
use thiserror::Error;

/// Failure modes of library operations.
///
/// The variants are coarse on purpose: the command-line front end maps them
/// onto distinct exit codes, so callers can tell a bad input apart from a
/// numerical breakdown without parsing messages.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A structurally invalid argument (unknown mode, mismatched layouts, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An index or occupation number outside the truncated space.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A state that violates its invariants (non-positive density, zero norm).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Physical parameters that make a requested model undefined.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An ODE integration that could not reach its end time.
    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    /// An iterative solver that stopped before meeting its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        /// Last iterate `(alpha, beta)` of the classical steady-state solver.
        last: (Complex64, Complex64),
    },
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
