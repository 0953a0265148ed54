// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Simulation of hybrid motion-photon N00N-state generation with a
//! trapped ion in two optical cavities.
//!
//! The crate is organised bottom-up.
//!
//! * [`fock`] holds the truncated Fock space, operators, states and
//!   fidelities. [`linalg`] supplies the dense complex kernels.
//! * [`params`] and [`hamiltonians`] build the model Hamiltonians.
//! * [`dynamics`] propagates states (unitary and Lindblad), solves the
//!   classical mean-field problem and checks adiabatic eliminations.
//! * [`protocol`] composes the beam-splitter, cross-Kerr, swap and rotation
//!   gates into the N00N protocol, ideally or through physical evolution.
//! * [`fluctuations`] averages the protocol over Gaussian gate-parameter
//!   noise, analytically and by Monte Carlo.
//!
//! Frequencies are angular (rad/s) and `hbar = 1` throughout.

// Input checks are written `!(x >= 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod fluctuations;
pub mod fock;
pub mod hamiltonians;
pub mod io;
pub mod linalg;
pub mod params;
pub mod protocol;
pub mod quadrature;
pub mod special;

pub use dynamics::ClassicalState;
pub use error::{Error, Result};
pub use fock::{
    basis_state, make_layout, mixed_pure_fidelity, partial_trace, state_fidelity, DensityOperator,
    Fidelity, Hermiticity, Mode, ModeLayout, Occupation, OperatorMatrix, StateVector, Subsystem,
    TruncationLeakage,
};
pub use params::PhysicalParams;
