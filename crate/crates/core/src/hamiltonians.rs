// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Hamiltonian constructors.
//!
//! Every constructor assembles small local operators, lifts them with
//! [`embed`](crate::fock::embed) and returns a Hermitian-flagged
//! [`OperatorMatrix`]. Units are rad/s with `hbar = 1`.

use num_complex::Complex64;

use crate::dynamics::ClassicalState;
use crate::error::{invalid_arg, Error, Result};
use crate::fock::{
    annihilation_local, embed, kron_le, lowering_local, number_local, position_local, Mode,
    ModeLayout, OperatorMatrix, Subsystem,
};
use crate::linalg::{hermitian_function, CMatrix};
use crate::params::PhysicalParams;

const A: Subsystem = Subsystem::Mode(Mode::A);
const B1: Subsystem = Subsystem::Mode(Mode::B1);
const B2: Subsystem = Subsystem::Mode(Mode::B2);
const ION: Subsystem = Subsystem::Ion;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Accumulates embedded terms of a Hamiltonian.
struct Builder<'a> {
    layout: &'a ModeLayout,
    acc: CMatrix,
}

impl<'a> Builder<'a> {
    fn new(layout: &'a ModeLayout) -> Self {
        let d = layout.dim();
        Builder {
            layout,
            acc: CMatrix::zeros(d, d),
        }
    }

    fn term(
        &mut self,
        coeff: Complex64,
        subs: &[Subsystem],
        locals: &[&CMatrix],
    ) -> Result<&mut Self> {
        if coeff == Complex64::new(0.0, 0.0) {
            return Ok(self);
        }
        let m = embed(self.layout, subs, &kron_le(locals))?;
        self.acc += m * coeff;
        Ok(self)
    }

    fn finish(self) -> Result<OperatorMatrix> {
        OperatorMatrix::hermitian(self.layout.clone(), self.acc)
    }
}

fn require_modes(layout: &ModeLayout, modes: &[Mode]) -> Result<Vec<usize>> {
    modes.iter().map(|m| layout.require(*m)).collect()
}

/// Local ion operators `(sigma_j, sigma_j†, sigma_j† sigma_j)`.
fn ion_ops(layout: &ModeLayout, transition: usize) -> Result<(CMatrix, CMatrix, CMatrix)> {
    let e = layout.excited_level(transition)?;
    let s = lowering_local(layout.ion_levels(), e);
    let sd = s.adjoint();
    let proj = &sd * &s;
    Ok((s, sd, proj))
}

/// `Omega * f(eta * x + phi)` on the motional mode as a local matrix.
fn profile_local(d: usize, omega: f64, eta: f64, phi: f64, f: fn(f64) -> f64) -> CMatrix {
    let x = position_local(d);
    hermitian_function(&x, |w| c(omega * f(eta * w + phi)))
}

/// `g(x) = Omega sin(eta x + Phi)` on mode `a`, evaluated through the
/// eigendecomposition of the truncated `x = a + a†`.
pub fn coupling_profile(layout: &ModeLayout, params: &PhysicalParams) -> Result<OperatorMatrix> {
    let d = layout.require(Mode::A)?;
    let local = profile_local(d, params.omega_rabi, params.eta, params.phi, f64::sin);
    OperatorMatrix::hermitian(layout.clone(), embed(layout, &[A], &local)?)
}

/// Full pumped ion-cavity Hamiltonian in the pump frame:
///
/// `nu a†a + Delta0 s1†s1 + Delta1 b1†b1 - (E* b1 + E b1†) + g(x)(s1† b1 + s1 b1†)`.
pub fn h_full_pumped(layout: &ModeLayout, params: &PhysicalParams) -> Result<OperatorMatrix> {
    let (h0, h1) = full_pumped_split(layout, params)?;
    Ok(&h0 + &h1)
}

/// [`h_full_pumped`] split into the free part `H0` (everything but the
/// ion-cavity coupling) and the coupling `H1 = g(x)(s1† b1 + s1 b1†)`, the
/// split used for eliminating the excited level of transition 1.
pub fn full_pumped_split(
    layout: &ModeLayout,
    params: &PhysicalParams,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let dims = require_modes(layout, &[Mode::A, Mode::B1])?;
    let (da, db) = (dims[0], dims[1]);
    let (s, sd, proj) = ion_ops(layout, 1)?;
    let b = annihilation_local(db);
    let bd = b.adjoint();
    let g = profile_local(da, params.omega_rabi, params.eta, params.phi, f64::sin);
    let mut h0 = Builder::new(layout);
    h0.term(c(params.nu), &[A], &[&number_local(da)])?
        .term(c(params.delta0), &[ION], &[&proj])?
        .term(c(params.delta1), &[B1], &[&number_local(db)])?
        .term(-params.pump.conj(), &[B1], &[&b])?
        .term(-params.pump, &[B1], &[&bd])?;
    let mut h1 = Builder::new(layout);
    h1.term(c(1.0), &[A, B1, ION], &[&g, &b, &sd])?
        .term(c(1.0), &[A, B1, ION], &[&g, &bd, &s])?;
    Ok((h0.finish()?, h1.finish()?))
}

/// Effective optomechanical Hamiltonian
/// `nu a†a + [Delta1 - g0 (a + a†)] b1†b1 - (E* b1 + E b1†)`,
/// with `-Omega^2/(2 Delta0) b1†b1` added when `retain_stark_shift` is set.
pub fn h_optomech(layout: &ModeLayout, params: &PhysicalParams) -> Result<OperatorMatrix> {
    let dims = require_modes(layout, &[Mode::A, Mode::B1])?;
    let (da, db) = (dims[0], dims[1]);
    let g0 = params.try_g0()?;
    let b = annihilation_local(db);
    let nb = number_local(db);
    let shift = if params.retain_stark_shift {
        params.stark_shift()
    } else {
        0.0
    };
    let mut h = Builder::new(layout);
    h.term(c(params.nu), &[A], &[&number_local(da)])?
        .term(c(params.delta1 - shift), &[B1], &[&nb])?
        .term(c(-g0), &[A, B1], &[&position_local(da), &nb])?
        .term(-params.pump.conj(), &[B1], &[&b])?
        .term(-params.pump, &[B1], &[&b.adjoint()])?;
    h.finish()
}

/// Linearised Hamiltonian around the classical amplitudes `steady`:
///
/// `nu a†a + D1 b1†b1 - g0 (a + a†)(beta b1† + beta* b1)`, with
/// `D1 = Delta1 - g0 (alpha + alpha*)`. With `cubic` set the residual
/// `-g0 (a + a†) b1†b1` is kept, which makes the Hamiltonian the exact
/// displaced-frame transform of [`h_optomech`] up to terms linear in the
/// fluctuation operators.
pub fn h_linearized(
    layout: &ModeLayout,
    params: &PhysicalParams,
    steady: &ClassicalState,
    cubic: bool,
) -> Result<OperatorMatrix> {
    let dims = require_modes(layout, &[Mode::A, Mode::B1])?;
    let (da, db) = (dims[0], dims[1]);
    let g0 = params.try_g0()?;
    let d1 = params.delta1 - 2.0 * g0 * steady.alpha.re;
    let b = annihilation_local(db);
    let x = position_local(da);
    let mut h = Builder::new(layout);
    h.term(c(params.nu), &[A], &[&number_local(da)])?
        .term(c(d1), &[B1], &[&number_local(db)])?
        .term(-g0 * steady.beta, &[A, B1], &[&x, &b.adjoint()])?
        .term(-g0 * steady.beta.conj(), &[A, B1], &[&x, &b])?;
    if cubic {
        h.term(c(-g0), &[A, B1], &[&x, &number_local(db)])?;
    }
    h.finish()
}

/// Relative tolerance on the resonance condition `Delta1 = nu`.
pub const BEAMSPLITTER_RESONANCE_TOL: f64 = 1e-9;

/// Beam-splitter Hamiltonian after the rotating-wave approximation:
/// `nu (a†a + b1†b1) - g0 (beta a b1† + beta* a† b1)`.
pub fn h_beamsplitter(
    layout: &ModeLayout,
    params: &PhysicalParams,
    beta_bar: Complex64,
) -> Result<OperatorMatrix> {
    let dims = require_modes(layout, &[Mode::A, Mode::B1])?;
    let (da, db) = (dims[0], dims[1]);
    if (params.delta1 - params.nu).abs() > BEAMSPLITTER_RESONANCE_TOL * params.nu.abs() {
        return Err(Error::InvalidParams(format!(
            "beam splitter needs delta1 = nu (delta1 = {}, nu = {})",
            params.delta1, params.nu
        )));
    }
    let g0 = params.try_g0()?;
    let a = annihilation_local(da);
    let b = annihilation_local(db);
    let mut h = Builder::new(layout);
    h.term(c(params.nu), &[A], &[&number_local(da)])?
        .term(c(params.nu), &[B1], &[&number_local(db)])?
        .term(-g0 * beta_bar, &[A, B1], &[&a, &b.adjoint()])?
        .term(-g0 * beta_bar.conj(), &[A, B1], &[&a.adjoint(), &b])?;
    h.finish()
}

/// Anti-node Hamiltonian of the second transition:
/// `nu a†a + Delta2 b2†b2 + Omega cos(eta x)(s2† b2 + s2 b2†)`.
pub fn h_antinode(layout: &ModeLayout, params: &PhysicalParams) -> Result<OperatorMatrix> {
    let dims = require_modes(layout, &[Mode::A, Mode::B2])?;
    let (da, db) = (dims[0], dims[1]);
    let (s, sd, _) = ion_ops(layout, 2)?;
    let b = annihilation_local(db);
    let g = profile_local(da, params.omega_rabi, params.eta, 0.0, f64::cos);
    let mut h = Builder::new(layout);
    h.term(c(params.nu), &[A], &[&number_local(da)])?
        .term(c(params.delta2), &[B2], &[&number_local(db)])?
        .term(c(1.0), &[A, B2, ION], &[&g, &b, &sd])?
        .term(c(1.0), &[A, B2, ION], &[&g, &b.adjoint(), &s])?;
    h.finish()
}

/// Cross-Kerr Hamiltonian `nu a†a + Delta2 b2†b2 - g_ck a†a b2†b2`.
pub fn h_cross_kerr(layout: &ModeLayout, params: &PhysicalParams) -> Result<OperatorMatrix> {
    let dims = require_modes(layout, &[Mode::A, Mode::B2])?;
    let (da, db) = (dims[0], dims[1]);
    let gck = params.try_g_ck()?;
    let na = number_local(da);
    let nb = number_local(db);
    let mut h = Builder::new(layout);
    h.term(c(params.nu), &[A], &[&na])?
        .term(c(params.delta2), &[B2], &[&nb])?
        .term(c(-gck), &[A, B2], &[&na, &nb])?;
    h.finish()
}

/// Interaction-picture cross-Kerr term `-g_ck a†a b2†b2`.
pub fn h_cross_kerr_interaction(
    layout: &ModeLayout,
    params: &PhysicalParams,
) -> Result<OperatorMatrix> {
    let dims = require_modes(layout, &[Mode::A, Mode::B2])?;
    let gck = params.try_g_ck()?;
    let mut h = Builder::new(layout);
    h.term(
        c(-gck),
        &[A, B2],
        &[&number_local(dims[0]), &number_local(dims[1])],
    )?;
    h.finish()
}

/// Interaction-picture beam-splitter term `-g0 (beta a b1† + beta* a† b1)`.
pub fn h_beamsplitter_interaction(
    layout: &ModeLayout,
    params: &PhysicalParams,
    beta_bar: Complex64,
) -> Result<OperatorMatrix> {
    let dims = require_modes(layout, &[Mode::A, Mode::B1])?;
    let g0 = params.try_g0()?;
    let a = annihilation_local(dims[0]);
    let b = annihilation_local(dims[1]);
    let mut h = Builder::new(layout);
    h.term(-g0 * beta_bar, &[A, B1], &[&a, &b.adjoint()])?
        .term(-g0 * beta_bar.conj(), &[A, B1], &[&a.adjoint(), &b])?;
    h.finish()
}

/// Resonant Jaynes-Cummings exchange `Omega (s2† b2 + s2 b2†)`.
pub fn h_jc_resonant(layout: &ModeLayout, params: &PhysicalParams) -> Result<OperatorMatrix> {
    let db = layout.require(Mode::B2)?;
    let (s, sd, _) = ion_ops(layout, 2)?;
    let b = annihilation_local(db);
    let om = c(params.omega_rabi);
    let mut h = Builder::new(layout);
    h.term(om, &[B2, ION], &[&b, &sd])?
        .term(om, &[B2, ION], &[&b.adjoint(), &s])?;
    h.finish()
}

/// Coherent drive of the second transition, `Lambda s2† + Lambda* s2`.
///
/// A drive with `Lambda = i |Lambda|` applied for `pi / (4 |Lambda|)`
/// implements `exp[pi (s2† - s2)/4]`, which sends `|g>` to
/// `(|g> + |e>)/sqrt 2`. A real `Lambda` gives `(|g> - i|e>)/sqrt 2`.
pub fn h_rabi_drive(layout: &ModeLayout, rabi: Complex64) -> Result<OperatorMatrix> {
    let (s, sd, _) = ion_ops(layout, 2)?;
    let mut h = Builder::new(layout);
    h.term(rabi, &[ION], &[&sd])?
        .term(rabi.conj(), &[ION], &[&s])?;
    h.finish()
}

/// Free Hamiltonian `sum_m w_m n_m` for the listed modes.
pub fn free_hamiltonian(layout: &ModeLayout, freqs: &[(Mode, f64)]) -> Result<OperatorMatrix> {
    let mut h = Builder::new(layout);
    for &(m, w) in freqs {
        let d = layout.require(m)?;
        h.term(c(w), &[Subsystem::Mode(m)], &[&number_local(d)])?;
    }
    h.finish()
}

/// Names accepted by [`build_named`].
pub const NAMED_HAMILTONIANS: [&str; 8] = [
    "full_pumped",
    "optomech",
    "linearized",
    "beamsplitter",
    "antinode",
    "cross_kerr",
    "jc_resonant",
    "rabi_drive",
];

/// Extra inputs needed by some named Hamiltonians.
#[derive(Debug, Clone, Copy)]
pub struct NamedInputs {
    /// Classical amplitudes for `linearized` and `beamsplitter`.
    pub steady: ClassicalState,
    /// Keep the cubic term in `linearized`.
    pub cubic: bool,
    /// Drive amplitude for `rabi_drive`.
    pub rabi: Complex64,
}

/// Dispatches on a Hamiltonian name (see [`NAMED_HAMILTONIANS`]).
pub fn build_named(
    name: &str,
    layout: &ModeLayout,
    params: &PhysicalParams,
    inputs: &NamedInputs,
) -> Result<OperatorMatrix> {
    match name {
        "full_pumped" => h_full_pumped(layout, params),
        "optomech" => h_optomech(layout, params),
        "linearized" => h_linearized(layout, params, &inputs.steady, inputs.cubic),
        "beamsplitter" => h_beamsplitter(layout, params, inputs.steady.beta),
        "antinode" => h_antinode(layout, params),
        "cross_kerr" => h_cross_kerr(layout, params),
        "jc_resonant" => h_jc_resonant(layout, params),
        "rabi_drive" => h_rabi_drive(layout, inputs.rabi),
        other => invalid_arg(format!(
            "unknown Hamiltonian '{other}'; expected one of {NAMED_HAMILTONIANS:?}"
        )),
    }
}
