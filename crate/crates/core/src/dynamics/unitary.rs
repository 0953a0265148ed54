// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Closed-system time evolution.

use nalgebra::DVector;

use crate::error::{invalid_arg, Result};
use crate::fock::{Hermiticity, OperatorMatrix, StateVector, DEFAULT_LEAKAGE_THRESHOLD};
use crate::linalg::{self, hermitian_eigen, matvec, spectral_synthesis, CMatrix, CI};

/// Cached eigendecomposition of a Hamiltonian for repeated propagation.
#[derive(Debug, Clone)]
pub struct Propagator {
    h: OperatorMatrix,
    w: DVector<f64>,
    v: CMatrix,
}

impl Propagator {
    /// Diagonalises `h`, which must be flagged Hermitian.
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        if !h.is_hermitian() {
            return invalid_arg("propagation requires a Hermitian-flagged Hamiltonian");
        }
        let (w, v) = hermitian_eigen(h.matrix());
        Ok(Propagator { h: h.clone(), w, v })
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> &DVector<f64> {
        &self.w
    }

    /// `exp(-i H t) psi`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.layout() != self.h.layout() {
            return invalid_arg("state and Hamiltonian live on different layouts");
        }
        let coeffs = self.v.adjoint() * psi.amplitudes();
        let rotated = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(self.w.iter())
                .map(|(c, &e)| c * (-CI * e * t).exp()),
        );
        StateVector::new(psi.layout().clone(), matvec(&self.v, &rotated))
    }

    /// The propagator `exp(-i H t)` as a matrix.
    pub fn unitary(&self, t: f64) -> OperatorMatrix {
        let u = spectral_synthesis(&self.w, &self.v, |e| (-CI * e * t).exp());
        OperatorMatrix::from_parts(self.h.layout().clone(), u, Hermiticity::General)
    }
}

/// `exp(-i H t) psi0` through the Hermitian eigendecomposition of `H`.
///
/// Logs a warning when the result has more than
/// [`DEFAULT_LEAKAGE_THRESHOLD`] population in a top Fock level.
pub fn evolve_unitary(h: &OperatorMatrix, psi0: &StateVector, t: f64) -> Result<StateVector> {
    let out = Propagator::new(h)?.evolve(psi0, t)?;
    out.truncation_leakage()
        .warn_above(DEFAULT_LEAKAGE_THRESHOLD, "evolve_unitary");
    Ok(out)
}

/// Same as [`evolve_unitary`] but through the scaling-and-squaring
/// exponential of `-i H t`.
pub fn evolve_unitary_taylor(
    h: &OperatorMatrix,
    psi0: &StateVector,
    t: f64,
) -> Result<StateVector> {
    if !h.is_hermitian() {
        return invalid_arg("propagation requires a Hermitian-flagged Hamiltonian");
    }
    if psi0.layout() != h.layout() {
        return invalid_arg("state and Hamiltonian live on different layouts");
    }
    let u = linalg::expm(&h.matrix().map(|z| -CI * z * t));
    StateVector::new(psi0.layout().clone(), matvec(&u, psi0.amplitudes()))
}

/// `exp(G)` for an anti-Hermitian generator `G`, computed from the
/// spectrum of the Hermitian matrix `i G`. Exactly unitary up to rounding.
pub fn unitary_from_generator(g: &OperatorMatrix) -> Result<OperatorMatrix> {
    if g.hermiticity() != Hermiticity::AntiHermitian {
        return invalid_arg("generator must be flagged anti-Hermitian");
    }
    let h = g.matrix().map(|z| CI * z);
    let u = linalg::hermitian_function(&h, |e| (-CI * e).exp());
    Ok(OperatorMatrix::from_parts(
        g.layout().clone(),
        u,
        Hermiticity::General,
    ))
}

/// Local version of [`unitary_from_generator`] on a bare matrix.
pub(crate) fn local_exp_anti_hermitian(g: &CMatrix) -> CMatrix {
    let h = g.map(|z| CI * z);
    let h = linalg::hermitian_part(&h);
    linalg::hermitian_function(&h, |e| (-CI * e).exp())
}
