// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Lindblad master equation.
//!
//! The generator is
//!
//! ```text
//! d rho / dt = -i [H, rho] + sum_k r_k D_{J_k}[rho],
//! D_J[rho]   = 2 J rho J† - J†J rho - rho J†J.
//! ```
//!
//! The rate multiplies the whole dissipator including its factor of two,
//! so a cavity with rate `gamma` loses energy at `2 gamma`:
//! `<b†b>(t) = exp(-2 gamma t) <b†b>(0)` when `H = 0`.
//!
//! The right-hand side is evaluated as
//! `K rho + (K rho)† + sum_k 2 r_k J_k rho J_k†` with
//! `K = -i H - sum_k r_k J_k† J_k`, using sparse-times-dense products only.

use log::warn;
use serde::{Deserialize, Serialize};

use super::ode::{integrate, OdeOptions, OdeStats, StepControl, Tolerance};
use super::sparse::Csr;
use crate::error::{invalid_arg, Result};
use crate::fock::{DensityOperator, OperatorMatrix, DEFAULT_LEAKAGE_THRESHOLD};
use crate::linalg::{hermitian_part, CMatrix, CI};

/// Threshold below which a sampled eigenvalue is reported as a positivity violation.
pub const POSITIVITY_WARN: f64 = -1e-8;

/// Everything needed to run the master equation.
#[derive(Debug, Clone)]
pub struct EvolutionSpec {
    pub hamiltonian: OperatorMatrix,
    /// Collapse operators with their rates.
    pub collapse_ops: Vec<(OperatorMatrix, f64)>,
    /// Total evolution time in seconds.
    pub duration: f64,
    pub tolerance: Tolerance,
    pub step_control: StepControl,
    /// Number of equal intervals between recorded samples (at least 1).
    pub samples: usize,
    /// Top-level Fock population that triggers a warning.
    pub leakage_threshold: f64,
}

impl EvolutionSpec {
    /// Spec with default tolerances, adaptive steps and a single interval.
    pub fn new(
        hamiltonian: OperatorMatrix,
        collapse_ops: Vec<(OperatorMatrix, f64)>,
        duration: f64,
    ) -> Self {
        EvolutionSpec {
            hamiltonian,
            collapse_ops,
            duration,
            tolerance: Tolerance::default(),
            step_control: StepControl::Adaptive,
            samples: 1,
            leakage_threshold: DEFAULT_LEAKAGE_THRESHOLD,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.hamiltonian.is_hermitian() {
            return invalid_arg("master equation needs a Hermitian-flagged Hamiltonian");
        }
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return invalid_arg(format!(
                "duration must be finite and >= 0, got {}",
                self.duration
            ));
        }
        for (j, r) in &self.collapse_ops {
            if !(*r >= 0.0) || !r.is_finite() {
                return invalid_arg(format!("collapse rate must be finite and >= 0, got {r}"));
            }
            if j.layout() != self.hamiltonian.layout() {
                return invalid_arg("collapse operator layout differs from the Hamiltonian");
            }
        }
        if self.samples == 0 {
            return invalid_arg("samples must be at least 1");
        }
        Ok(())
    }

    /// Sample times `k * duration / samples`, `k = 0..=samples`.
    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.samples)
            .map(|k| self.duration * k as f64 / self.samples as f64)
            .collect()
    }
}

/// Snapshot recorded at a sample time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleDiagnostics {
    pub t: f64,
    pub trace_re: f64,
    pub trace_im: f64,
    pub min_eigenvalue: f64,
    pub max_leakage: f64,
}

/// State and diagnostics at one sample time.
#[derive(Debug, Clone)]
pub struct MasterSample {
    pub t: f64,
    pub state: DensityOperator,
    pub diagnostics: SampleDiagnostics,
}

/// Output of [`evolve_master`].
#[derive(Debug, Clone)]
pub struct MasterRun {
    pub final_state: DensityOperator,
    pub samples: Vec<MasterSample>,
    pub stats: OdeStats,
    /// Largest `|Tr rho - 1|` over the samples.
    pub max_trace_drift: f64,
    /// Smallest eigenvalue seen over the samples.
    pub min_eigenvalue: f64,
}

struct Lindbladian {
    k: Csr,
    jumps: Vec<(Csr, f64)>,
}

impl Lindbladian {
    fn new(spec: &EvolutionSpec) -> Self {
        let h = spec.hamiltonian.matrix();
        let mut k = h.map(|z| -CI * z);
        for (j, r) in &spec.collapse_ops {
            if *r > 0.0 {
                let jm = j.matrix();
                let jdj = jm.adjoint() * jm;
                k -= jdj.scale(*r);
            }
        }
        let jumps = spec
            .collapse_ops
            .iter()
            .filter(|(_, r)| *r > 0.0)
            .map(|(j, r)| (Csr::from_dense(j.matrix()), *r))
            .collect();
        Lindbladian {
            k: Csr::from_dense(&k),
            jumps,
        }
    }

    fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let kr = self.k.mul_dense(rho);
        let mut out = &kr + kr.adjoint();
        for (j, r) in &self.jumps {
            // J rho J† = J (J rho†)† = J (J rho)† because rho is Hermitian.
            let jr = j.mul_dense(rho);
            let jrj = j.mul_dense(&jr.adjoint());
            out += jrj.adjoint().scale(2.0 * r);
        }
        out
    }
}

/// Integrates the master equation from `rho0` for `spec.duration`.
///
/// Hermiticity is restored after every accepted step; trace and the
/// smallest eigenvalue are recorded at each sample time and a warning is
/// logged if positivity is violated beyond `1e-8` or a mode leaks past
/// `spec.leakage_threshold`.
pub fn evolve_master(spec: &EvolutionSpec, rho0: &DensityOperator) -> Result<MasterRun> {
    spec.validate()?;
    if rho0.layout() != spec.hamiltonian.layout() {
        return invalid_arg("initial state layout differs from the Hamiltonian");
    }
    let layout = rho0.layout().clone();
    let lind = Lindbladian::new(spec);
    let times = spec.sample_times();
    let opts = OdeOptions {
        tolerance: spec.tolerance,
        control: spec.step_control,
        ..Default::default()
    };
    let mut samples = Vec::with_capacity(times.len());
    let (rho, stats) = integrate(
        |_, r: &CMatrix| lind.rhs(r),
        0.0,
        rho0.matrix().clone(),
        &times,
        &opts,
        |r| *r = hermitian_part(r),
        |t, r| {
            let state = DensityOperator::from_matrix_unchecked(layout.clone(), r.clone());
            let tr = state.trace();
            let min_eigenvalue = state.min_eigenvalue();
            let leak = state.truncation_leakage();
            leak.warn_above(spec.leakage_threshold, "evolve_master");
            if min_eigenvalue < POSITIVITY_WARN {
                warn!("evolve_master: eigenvalue {min_eigenvalue:.3e} at t = {t:.6e}");
            }
            samples.push(MasterSample {
                t,
                diagnostics: SampleDiagnostics {
                    t,
                    trace_re: tr.re,
                    trace_im: tr.im,
                    min_eigenvalue,
                    max_leakage: leak.max(),
                },
                state,
            });
            Ok(())
        },
    )?;
    let max_trace_drift = samples
        .iter()
        .map(|s| (s.diagnostics.trace_re - 1.0).hypot(s.diagnostics.trace_im))
        .fold(0.0, f64::max);
    let min_eigenvalue = samples
        .iter()
        .map(|s| s.diagnostics.min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    Ok(MasterRun {
        final_state: DensityOperator::from_matrix_unchecked(layout, rho),
        samples,
        stats,
        max_trace_drift,
        min_eigenvalue,
    })
}
