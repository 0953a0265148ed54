// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Time evolution and the classical limit.
//!
//! * [`unitary`]: closed-system propagation through the Hermitian spectrum.
//! * [`master`]: Lindblad master equation with an adaptive embedded
//!   Runge-Kutta pair.
//! * [`classical`]: the mean-field equations for the motional and cavity
//!   amplitudes, their fixed point and its linear stability.
//! * [`frame`]: the displacement to the frame of the classical amplitudes.
//! * [`projector`]: second-order effective Hamiltonians by the projection
//!   operator method, evaluated by quadrature.
//! * [`elimination`]: co-evolution of a full model and its effective
//!   counterpart.

pub mod classical;
pub mod elimination;
pub mod frame;
pub mod master;
pub mod ode;
pub mod projector;
mod sparse;
pub mod unitary;

pub use classical::{
    classical_rhs, classical_steady_state, classical_steady_state_with, classical_trajectory,
    classical_trajectory_with, stability_analysis, stability_matrix, steady_residual,
    ClassicalState, StabilityReport, SteadyMethod, SteadyOptions, SteadyReport, TrajectoryOptions,
};
pub use elimination::{
    cross_kerr_elimination, verify_elimination, CrossKerrStudy, EliminationReport, PhaseCalibration,
};
pub use frame::{displace_frame, displacement_operator, undisplace_frame, Displaceable};
pub use master::{evolve_master, EvolutionSpec, MasterRun, MasterSample};
pub use ode::{OdeStats, StepControl, Tolerance};
pub use projector::{
    effective_hamiltonian_projector, effective_hamiltonian_projector_with, ProjectorOptions,
    ProjectorResult,
};
pub use unitary::{evolve_unitary, evolve_unitary_taylor, unitary_from_generator, Propagator};
