// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Numerical check of an adiabatic elimination by co-evolution.
//!
//! The full and effective Hamiltonians act on one layout (the effective
//! model leaves the eliminated degrees of freedom untouched). Both evolve
//! the same initial state and the report records `1 - |<eff|full>|` on a
//! time grid.
//!
//! An elimination at second order also produces single-mode frequency
//! shifts (Stark and zero-point terms) that the effective model may omit
//! on purpose. [`PhaseCalibration::LocalModes`] removes them before the
//! overlap is taken: the extra phase per quantum of each mode is read off
//! from the amplitudes of the vacuum and of the single-quantum basis states
//! and undone on the full state.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::unitary::Propagator;
use crate::error::{invalid_arg, Result};
use crate::fock::{number_op, Mode, ModeLayout, Occupation, OperatorMatrix, StateVector};
use crate::hamiltonians::{h_antinode, h_cross_kerr};
use crate::linalg::CVector;
use crate::params::PhysicalParams;

/// How the full state is aligned with the effective one before comparing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseCalibration {
    /// Compare the states as they are.
    #[default]
    None,
    /// Remove a phase linear in each mode occupation.
    LocalModes,
}

/// Infidelity along a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationReport {
    pub times: Vec<f64>,
    pub infidelity: Vec<f64>,
    pub max_infidelity: f64,
}

/// Co-evolves `psi0` under `full_h` and `eff_h` and compares at `times`.
pub fn verify_elimination(
    full_h: &OperatorMatrix,
    eff_h: &OperatorMatrix,
    psi0: &StateVector,
    times: &[f64],
    calibration: PhaseCalibration,
) -> Result<EliminationReport> {
    if full_h.layout() != eff_h.layout() || full_h.layout() != psi0.layout() {
        return invalid_arg(
            "full Hamiltonian, effective Hamiltonian and state must share a layout",
        );
    }
    if times.iter().any(|t| !t.is_finite()) {
        return invalid_arg("times must be finite");
    }
    let psi0 = psi0.normalized()?;
    let full = Propagator::new(full_h)?;
    let eff = Propagator::new(eff_h)?;
    let numbers: Vec<(Mode, OperatorMatrix)> = psi0
        .layout()
        .modes()
        .into_iter()
        .map(|m| Ok((m, number_op(psi0.layout(), m)?)))
        .collect::<Result<_>>()?;
    let mut infidelity = Vec::with_capacity(times.len());
    for &t in times {
        let f = full.evolve(&psi0, t)?;
        let e = eff.evolve(&psi0, t)?;
        let f = match calibration {
            PhaseCalibration::None => f,
            PhaseCalibration::LocalModes => calibrate(&f, &e, &numbers)?,
        };
        let overlap = e.overlap(&f)?.norm();
        infidelity.push((1.0 - overlap).max(0.0));
    }
    let max_infidelity = infidelity.iter().cloned().fold(0.0, f64::max);
    Ok(EliminationReport {
        times: times.to_vec(),
        infidelity,
        max_infidelity,
    })
}

fn calibrate(
    full: &StateVector,
    eff: &StateVector,
    numbers: &[(Mode, OperatorMatrix)],
) -> Result<StateVector> {
    let layout = full.layout();
    let ratio = |occ: &Occupation| -> Result<Option<num_complex::Complex64>> {
        let (x, y) = (full.amplitude(occ)?, eff.amplitude(occ)?);
        Ok(if x.norm() > 1e-12 && y.norm() > 1e-12 {
            Some(x / y)
        } else {
            None
        })
    };
    let Some(r_vac) = ratio(&Occupation::default())? else {
        return Ok(full.clone());
    };
    let mut phase = vec![0.0; layout.dim()];
    for (mode, n_op) in numbers {
        let mut occ = Occupation::default();
        match mode {
            Mode::A => occ.a = 1,
            Mode::B1 => occ.b1 = 1,
            Mode::B2 => occ.b2 = 1,
        }
        if layout.cutoff(*mode).is_some_and(|c| c < 2) {
            continue;
        }
        if let Some(r) = ratio(&occ)? {
            let delta = (r / r_vac).arg();
            for (k, ph) in phase.iter_mut().enumerate() {
                *ph += delta * n_op.matrix()[(k, k)].re;
            }
        }
    }
    let amps = CVector::from_iterator(
        layout.dim(),
        full.amplitudes()
            .iter()
            .zip(&phase)
            .map(|(z, &ph)| z * num_complex::Complex64::from_polar(1.0, -ph)),
    );
    StateVector::new(layout.clone(), amps)
}

/// The anti-node versus cross-Kerr comparison on a small layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossKerrStudy {
    /// Vacuum Rabi coupling `Omega` (rad/s).
    pub omega: f64,
    /// Detuning `Delta2` (rad/s).
    pub delta2: f64,
    /// Trap frequency `nu` (rad/s).
    pub nu: f64,
    pub eta: f64,
    /// Fock cutoff of the motional mode.
    pub cutoff_a: usize,
    /// Number of time intervals.
    pub samples: usize,
    pub calibration: PhaseCalibration,
    /// Total time; defaults to the cross-phase time `pi / g_ck`.
    #[serde(default)]
    pub duration: Option<f64>,
}

impl CrossKerrStudy {
    /// Point of the detuning ladder with `Omega = 1`, `Delta2 = ratio`,
    /// `nu = nu_over_delta2 * Delta2`, motional cutoff 8, 16 intervals and
    /// local phase calibration.
    pub fn ladder(ratio: f64, nu_over_delta2: f64, eta: f64) -> Self {
        CrossKerrStudy {
            omega: 1.0,
            delta2: ratio,
            nu: nu_over_delta2 * ratio,
            eta,
            cutoff_a: 8,
            samples: 16,
            calibration: PhaseCalibration::LocalModes,
            duration: None,
        }
    }

    /// Parameters with the study's couplings and everything else zero.
    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            nu: self.nu,
            delta0: 1.0,
            delta1: 0.0,
            delta2: self.delta2,
            omega_rabi: self.omega,
            eta: self.eta,
            phi: 0.0,
            pump: num_complex::Complex64::new(0.0, 0.0),
            gamma: 0.0,
            gamma_motion: 0.0,
            gamma_e: 0.0,
            retain_stark_shift: false,
        }
    }

    /// `pi / g_ck`, the time of a pi cross phase.
    pub fn t_pi(&self) -> Result<f64> {
        let g = self.params().try_g_ck()?;
        if g == 0.0 {
            return invalid_arg("g_ck vanishes; give an explicit duration");
        }
        Ok(PI / g.abs())
    }

    pub fn layout(&self) -> Result<ModeLayout> {
        ModeLayout::new(&[(Mode::A, self.cutoff_a), (Mode::B2, 2)], 2)
    }

    /// `(|0> + |1>)_a (|0> + |1>)_b2 |g> / 2`.
    pub fn initial_state(&self) -> Result<StateVector> {
        let layout = self.layout()?;
        let mut terms = Vec::new();
        let states: Vec<StateVector> = [(0, 0), (1, 0), (0, 1), (1, 1)]
            .iter()
            .map(|&(a, b)| StateVector::basis(&layout, &Occupation::new(a, 0, b, 0)))
            .collect::<Result<_>>()?;
        for s in &states {
            terms.push((num_complex::Complex64::new(0.5, 0.0), s));
        }
        StateVector::superposition(&terms)
    }
}

/// Runs [`verify_elimination`] for the anti-node Hamiltonian against the
/// cross-Kerr Hamiltonian.
pub fn cross_kerr_elimination(study: &CrossKerrStudy) -> Result<EliminationReport> {
    if study.samples == 0 || study.cutoff_a < 2 {
        return invalid_arg("need at least one sample interval and a motional cutoff >= 2");
    }
    let duration = match study.duration {
        Some(d) if d.is_finite() && d >= 0.0 => d,
        Some(d) => {
            return invalid_arg(format!("duration must be finite and non-negative, got {d}"))
        }
        None => study.t_pi()?,
    };
    let layout = study.layout()?;
    let p = study.params();
    let full = h_antinode(&layout, &p)?;
    let eff = h_cross_kerr(&layout, &p)?;
    let times: Vec<f64> = (0..=study.samples)
        .map(|k| duration * k as f64 / study.samples as f64)
        .collect();
    verify_elimination(
        &full,
        &eff,
        &study.initial_state()?,
        &times,
        study.calibration,
    )
}
