// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use noonforge::dynamics::frame::undisplace_frame;
use noonforge::dynamics::unitary::evolve_unitary;
use noonforge::dynamics::{classical_steady_state, ClassicalState};
use noonforge::fock::{creation_op, ladder_op, lowering_op, number_op, position_op};
use noonforge::hamiltonians::{
    coupling_profile, h_antinode, h_beamsplitter, h_cross_kerr, h_full_pumped, h_jc_resonant,
    h_linearized, h_optomech, h_rabi_drive,
};
use noonforge::linalg::{inf_norm, matmul, CMatrix};
use noonforge::{
    make_layout, Error, Mode, ModeLayout, Occupation, OperatorMatrix, PhysicalParams, StateVector,
};
use num_complex::Complex64;

fn toy_params() -> PhysicalParams {
    PhysicalParams {
        nu: 1.0,
        delta0: 10.0,
        delta1: 1.0,
        delta2: 2.0,
        omega_rabi: 0.4,
        eta: 0.1,
        phi: FRAC_PI_4,
        pump: Complex64::new(0.0, 0.0),
        gamma: 0.0,
        gamma_motion: 0.0,
        gamma_e: 0.0,
        retain_stark_shift: false,
    }
}

fn hermiticity_error(h: &OperatorMatrix) -> f64 {
    let m = h.matrix();
    inf_norm(&(m - m.adjoint())) / inf_norm(m).max(f64::MIN_POSITIVE)
}

fn commutator_norm(x: &OperatorMatrix, y: &OperatorMatrix) -> f64 {
    let (a, b) = (x.matrix(), y.matrix());
    inf_norm(&(matmul(a, b) - matmul(b, a)))
}

fn element(h: &OperatorMatrix, layout: &ModeLayout, row: Occupation, col: Occupation) -> Complex64 {
    h.matrix()[(
        layout.flat_index(&row).unwrap(),
        layout.flat_index(&col).unwrap(),
    )]
}

fn sum(ops: &[OperatorMatrix]) -> OperatorMatrix {
    let mut m = ops[0].matrix().clone();
    for o in &ops[1..] {
        m += o.matrix();
    }
    OperatorMatrix::hermitian(ops[0].layout().clone(), m).unwrap()
}

#[test]
fn profile_reduces_to_scalar_without_lamb_dicke() {
    let layout = make_layout(&[6], 1).unwrap();
    let mut p = toy_params();
    p.eta = 0.0;
    for phi in [FRAC_PI_4, FRAC_PI_2] {
        p.phi = phi;
        let g = coupling_profile(&layout, &p).unwrap();
        let expect = CMatrix::identity(6, 6) * Complex64::new(p.omega_rabi * phi.sin(), 0.0);
        assert!(inf_norm(&(g.matrix() - expect)) < 1e-15);
    }
}

#[test]
fn profile_matches_taylor_series_on_low_levels() {
    let d = 20;
    let layout = make_layout(&[d], 1).unwrap();
    let p = PhysicalParams {
        omega_rabi: 1.0,
        ..toy_params()
    };
    let g = coupling_profile(&layout, &p).unwrap();
    // sin(eta x + Phi) = sum_k sin(Phi + k pi/2) (eta x)^k / k!, 14 terms.
    let ex = position_op(&layout, Mode::A).unwrap().matrix() * Complex64::new(p.eta, 0.0);
    let mut power = CMatrix::identity(d, d);
    let mut series = CMatrix::zeros(d, d);
    let mut fact = 1.0;
    for k in 0..14 {
        if k > 0 {
            power = matmul(&power, &ex);
            fact *= k as f64;
        }
        let c = (p.phi + k as f64 * FRAC_PI_2).sin() / fact;
        series += &power * Complex64::new(c, 0.0);
    }
    let diff = g.matrix() - series;
    let low = diff
        .view((0, 0), (10, 10))
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    assert!(low <= 1e-10, "{low:e}");
}

#[test]
fn profile_approaches_scalar_limit_linearly() {
    let layout = make_layout(&[8], 1).unwrap();
    let dev = |eta: f64| {
        let p = PhysicalParams {
            eta,
            ..toy_params()
        };
        let g = coupling_profile(&layout, &p).unwrap();
        let s = CMatrix::identity(8, 8) * Complex64::new(p.omega_rabi * p.phi.sin(), 0.0);
        inf_norm(&(g.matrix() - s))
    };
    let ratio = dev(1e-3) / dev(1e-4);
    // First order in eta; the second-order term shifts the ratio by ~ eta ||x||.
    assert!((ratio - 10.0).abs() < 0.1, "{ratio}");
}

#[test]
fn full_hamiltonian_without_coupling_is_diagonal() {
    let layout = make_layout(&[3, 3], 2).unwrap();
    let p = PhysicalParams {
        omega_rabi: 0.0,
        ..toy_params()
    };
    let h = h_full_pumped(&layout, &p).unwrap();
    for i in 0..layout.dim() {
        for j in 0..layout.dim() {
            let o = layout.occupation(i);
            let expect = if i == j {
                p.nu * o.a as f64 + p.delta0 * o.level as f64 + p.delta1 * o.b1 as f64
            } else {
                0.0
            };
            assert!((h.matrix()[(i, j)] - expect).norm() < 1e-15);
        }
    }
}

#[test]
fn full_hamiltonian_excitation_symmetry() {
    let layout = make_layout(&[4, 4], 2).unwrap();
    let total = sum(&[
        number_op(&layout, Mode::A).unwrap(),
        number_op(&layout, Mode::B1).unwrap(),
        noonforge::fock::ion_projector(&layout, 1).unwrap(),
    ]);
    let p = toy_params();
    let h = h_full_pumped(&layout, &p).unwrap();
    assert!(hermiticity_error(&h) <= 1e-12);
    assert!(commutator_norm(&h, &total) > 1e-3);
    let flat = PhysicalParams {
        eta: 0.0,
        phi: FRAC_PI_2,
        ..p
    };
    let h = h_full_pumped(&layout, &flat).unwrap();
    assert!(commutator_norm(&h, &total) < 1e-14);
}

#[test]
fn optomechanical_matrix_element() {
    let layout = make_layout(&[3, 3], 1).unwrap();
    let p = toy_params();
    let h = h_optomech(&layout, &p).unwrap();
    let z = element(
        &h,
        &layout,
        Occupation::new(1, 1, 0, 0),
        Occupation::new(0, 1, 0, 0),
    );
    assert!((z + p.g0()).norm() < 1e-15);
    let zero = PhysicalParams {
        omega_rabi: 0.0,
        ..p
    };
    let h = h_optomech(&layout, &zero).unwrap();
    let off: f64 = h
        .matrix()
        .iter()
        .enumerate()
        .filter(|(k, _)| k % (layout.dim() + 1) != 0)
        .map(|(_, z)| z.norm())
        .sum();
    assert_eq!(off, 0.0);
    let bad = PhysicalParams { delta0: 0.0, ..p };
    assert!(matches!(
        h_optomech(&layout, &bad),
        Err(Error::InvalidParams(_))
    ));
}

#[test]
fn preset_couplings() {
    let p = PhysicalParams::paper_feasibility();
    assert!((p.g0() - TAU * 5.0).abs() < 1e-12 * p.g0());
    assert!((p.g_ck() - 10.0 * p.gamma).abs() < 1e-12 * p.g_ck());
    let t_pi = std::f64::consts::PI / p.g_ck();
    assert!((t_pi - 5e-3).abs() < 1e-15);
    let flipped = PhysicalParams {
        delta2: -p.delta2,
        ..p
    };
    assert_eq!(flipped.g_ck(), -p.g_ck());
}

#[test]
fn beam_splitter_structure() {
    let layout = make_layout(&[4, 4], 1).unwrap();
    let p = toy_params();
    let beta = Complex64::new(0.7, 0.0);
    let h = h_beamsplitter(&layout, &p, beta).unwrap();
    let n = sum(&[
        number_op(&layout, Mode::A).unwrap(),
        number_op(&layout, Mode::B1).unwrap(),
    ]);
    assert!(commutator_norm(&h, &n) < 1e-12);
    let off = element(
        &h,
        &layout,
        Occupation::new(1, 0, 0, 0),
        Occupation::new(0, 1, 0, 0),
    );
    assert!((off + p.g0() * beta.re).norm() < 1e-15);
    let detuned = PhysicalParams { delta1: 1.1, ..p };
    assert!(matches!(
        h_beamsplitter(&layout, &detuned, beta),
        Err(Error::InvalidParams(_))
    ));
}

#[test]
fn beam_splitter_never_leaves_the_excitation_block() {
    let layout = make_layout(&[5, 5], 1).unwrap();
    let h = h_beamsplitter(&layout, &toy_params(), Complex64::new(0.0, 3.0)).unwrap();
    let psi = StateVector::basis(&layout, &Occupation::new(1, 2, 0, 0)).unwrap();
    let out = evolve_unitary(&h, &psi, 17.0).unwrap();
    for (i, z) in out.amplitudes().iter().enumerate() {
        let o = layout.occupation(i);
        if o.a + o.b1 != 3 {
            assert!(z.norm() < 1e-13);
        }
    }
}

#[test]
fn antinode_conserves_cavity_plus_ion_excitation() {
    let layout = make_layout(&[4, 1, 3], 3).unwrap();
    let p = toy_params();
    let h = h_antinode(&layout, &p).unwrap();
    assert!(hermiticity_error(&h) <= 1e-12);
    let e = layout.excited_level(2).unwrap();
    let n = sum(&[
        number_op(&layout, Mode::B2).unwrap(),
        noonforge::fock::ion_projector(&layout, e).unwrap(),
    ]);
    assert!(commutator_norm(&h, &n) < 1e-14);
}

#[test]
fn antinode_without_lamb_dicke_is_jaynes_cummings() {
    let layout = make_layout(&[2, 1, 2], 2).unwrap();
    let p = PhysicalParams {
        eta: 0.0,
        ..toy_params()
    };
    let h = h_antinode(&layout, &p).unwrap();
    let z = element(
        &h,
        &layout,
        Occupation::new(0, 0, 0, 1),
        Occupation::new(0, 0, 1, 0),
    );
    assert!((z - p.omega_rabi).norm() < 1e-15);
}

#[test]
fn cross_kerr_is_diagonal() {
    let layout = make_layout(&[3, 1, 3], 1).unwrap();
    let p = toy_params();
    let h = h_cross_kerr(&layout, &p).unwrap();
    let d = layout.dim();
    for i in 0..d {
        for j in 0..d {
            if i != j {
                assert_eq!(h.matrix()[(i, j)], Complex64::new(0.0, 0.0));
            }
        }
    }
    let z = element(
        &h,
        &layout,
        Occupation::new(1, 0, 1, 0),
        Occupation::new(1, 0, 1, 0),
    );
    assert!((z.re - (p.nu + p.delta2 - p.g_ck())).abs() < 1e-15);
    let bad = PhysicalParams { delta2: 0.0, ..p };
    assert!(h_cross_kerr(&layout, &bad).is_err());
}

#[test]
fn resonant_exchange_and_drive() {
    let layout = make_layout(&[1, 1, 2], 2).unwrap();
    let p = toy_params();
    let h = h_jc_resonant(&layout, &p).unwrap();
    let psi = StateVector::basis(&layout, &Occupation::new(0, 0, 1, 0)).unwrap();
    let out = evolve_unitary(&h, &psi, FRAC_PI_2 / p.omega_rabi).unwrap();
    let e = StateVector::basis(&layout, &Occupation::new(0, 0, 0, 1)).unwrap();
    assert!((e.overlap(&out).unwrap() - Complex64::new(0.0, -1.0)).norm() < 1e-12);

    let lam = 0.3;
    let h = h_rabi_drive(&layout, Complex64::new(0.0, lam)).unwrap();
    let g = StateVector::basis(&layout, &Occupation::new(0, 0, 0, 0)).unwrap();
    let out = evolve_unitary(&h, &g, FRAC_PI_4 / lam).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assert!((g.overlap(&out).unwrap() - s).norm() < 1e-12);
    assert!((e.overlap(&out).unwrap() - s).norm() < 1e-12);
    assert!(h_jc_resonant(&make_layout(&[1, 1], 2).unwrap(), &p).is_err());
}

#[test]
fn linearized_coupling_is_hermitian_for_complex_amplitude() {
    let layout = make_layout(&[3, 3], 1).unwrap();
    let s = ClassicalState::new(Complex64::new(0.1, -0.2), Complex64::new(-0.5, 1.5));
    for cubic in [false, true] {
        let h = h_linearized(&layout, &toy_params(), &s, cubic).unwrap();
        assert!(hermiticity_error(&h) <= 1e-12);
    }
    let h = h_linearized(&layout, &toy_params(), &ClassicalState::default(), false).unwrap();
    let n = number_op(&layout, Mode::A).unwrap();
    assert!(commutator_norm(&h, &n) < 1e-15);
}

#[test]
fn cubic_linearized_dynamics_matches_optomechanical_in_displaced_frame() {
    // Small amplitudes keep the displaced states far from the cutoff.
    let layout = make_layout(&[12, 12], 1).unwrap();
    let p = PhysicalParams {
        delta1: 1.3,
        omega_rabi: 2.0,
        pump: Complex64::new(0.05, 0.02),
        ..toy_params()
    };
    let steady = classical_steady_state(&p).unwrap();
    let h_om = h_optomech(&layout, &p).unwrap();
    let h_lin = h_linearized(&layout, &p, &steady, true).unwrap();
    let psi0 = StateVector::basis(&layout, &Occupation::new(1, 0, 0, 0)).unwrap();
    let lab0 = undisplace_frame(&psi0, &steady).unwrap();
    for t in [0.5, 2.0, 5.0] {
        let full = evolve_unitary(&h_om, &lab0, t).unwrap();
        let lin = undisplace_frame(&evolve_unitary(&h_lin, &psi0, t).unwrap(), &steady).unwrap();
        let f = full.overlap(&lin).unwrap().norm();
        assert!(1.0 - f < 1e-8, "t={t}: 1 - F = {:e}", 1.0 - f);
    }
}

#[test]
fn ladder_operators_are_adjoint() {
    let layout = make_layout(&[3, 2, 2], 3).unwrap();
    for m in [Mode::A, Mode::B1, Mode::B2] {
        let a = ladder_op(&layout, m).unwrap();
        let ad = creation_op(&layout, m).unwrap();
        assert!(inf_norm(&(a.matrix().adjoint() - ad.matrix())) == 0.0);
    }
    assert!(lowering_op(&layout, 2).is_ok());
}
