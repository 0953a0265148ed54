// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Displaced frame around the classical amplitudes.
//!
//! `D = exp(alpha a† - alpha* a) exp(beta b1† - beta* b1)` satisfies
//! `D† a D = a + alpha` and `D† b1 D = b1 + beta` on the untruncated space.
//! In a truncated space both exponentials are computed exactly, so `D` is
//! unitary, but the shift relation only holds on states well below the
//! cutoff.

use crate::dynamics::classical::ClassicalState;
use crate::dynamics::unitary::local_exp_anti_hermitian;
use crate::error::{invalid_arg, Result};
use crate::fock::{
    annihilation_local, embed, DensityOperator, Hermiticity, Mode, ModeLayout, OperatorMatrix,
    StateVector, Subsystem,
};
use crate::linalg::{matmul, matvec, CMatrix};

/// `D(alpha, beta)` on `layout`. A mode missing from the layout is only
/// allowed when its amplitude is zero.
pub fn displacement_operator(
    layout: &ModeLayout,
    shift: &ClassicalState,
) -> Result<OperatorMatrix> {
    let d = layout.dim();
    let mut total = CMatrix::identity(d, d);
    for (mode, amp) in [(Mode::A, shift.alpha), (Mode::B1, shift.beta)] {
        match layout.cutoff(mode) {
            Some(n) => {
                let a = annihilation_local(n);
                let gen = a.adjoint() * amp - a * amp.conj();
                let local = local_exp_anti_hermitian(&gen);
                total = matmul(&total, &embed(layout, &[Subsystem::Mode(mode)], &local)?);
            }
            None if amp.norm() == 0.0 => {}
            None => return invalid_arg(format!("layout has no mode {mode} to displace")),
        }
    }
    Ok(OperatorMatrix::from_parts(
        layout.clone(),
        total,
        Hermiticity::General,
    ))
}

/// Objects that can be moved into and out of the displaced frame.
pub trait Displaceable: Sized {
    fn layout(&self) -> &ModeLayout;
    /// Conjugation `x -> U x U†` for states and operators alike (`U x` for a
    /// ket).
    fn conjugate(&self, u: &CMatrix) -> Result<Self>;
}

impl Displaceable for StateVector {
    fn layout(&self) -> &ModeLayout {
        StateVector::layout(self)
    }

    fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        StateVector::new(self.layout().clone(), matvec(u, self.amplitudes()))
    }
}

impl Displaceable for OperatorMatrix {
    fn layout(&self) -> &ModeLayout {
        OperatorMatrix::layout(self)
    }

    fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        let m = matmul(&matmul(u, self.matrix()), &u.adjoint());
        // Unitary conjugation preserves (anti-)Hermiticity; restore it
        // exactly against rounding.
        Ok(match self.hermiticity() {
            Hermiticity::Hermitian => OperatorMatrix::from_parts(
                self.layout().clone(),
                crate::linalg::hermitian_part(&m),
                Hermiticity::Hermitian,
            ),
            Hermiticity::AntiHermitian => OperatorMatrix::from_parts(
                self.layout().clone(),
                crate::linalg::anti_hermitian_part(&m),
                Hermiticity::AntiHermitian,
            ),
            Hermiticity::General => {
                OperatorMatrix::from_parts(self.layout().clone(), m, Hermiticity::General)
            }
        })
    }
}

impl Displaceable for DensityOperator {
    fn layout(&self) -> &ModeLayout {
        DensityOperator::layout(self)
    }

    fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        let m = matmul(&matmul(u, self.matrix()), &u.adjoint());
        Ok(DensityOperator::from_matrix_unchecked(
            self.layout().clone(),
            crate::linalg::hermitian_part(&m),
        ))
    }
}

/// Lab frame to displaced frame: `x -> D† x D` (`psi -> D† psi`).
pub fn displace_frame<T: Displaceable>(x: &T, shift: &ClassicalState) -> Result<T> {
    let d = displacement_operator(x.layout(), shift)?;
    x.conjugate(&d.matrix().adjoint())
}

/// Displaced frame to lab frame: `x -> D x D†` (`psi -> D psi`). Maps the
/// vacuum to the coherent state with `<a> = alpha`, `<b1> = beta`.
pub fn undisplace_frame<T: Displaceable>(x: &T, shift: &ClassicalState) -> Result<T> {
    let d = displacement_operator(x.layout(), shift)?;
    x.conjugate(d.matrix())
}
