// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

use noonforge::fock::{creation_op, ion_projector, ladder_op, lowering_op};
use noonforge::linalg::{matmul, CMatrix, CVector};
use noonforge::protocol::{noon_target, IonOutcome};
use noonforge::{
    basis_state, make_layout, mixed_pure_fidelity, partial_trace, state_fidelity, DensityOperator,
    Error, Mode, ModeLayout, Occupation, StateVector, Subsystem,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn state_from(layout: &ModeLayout, raw: &[(f64, f64)]) -> StateVector {
    let d = layout.dim();
    let amps = CVector::from_iterator(
        d,
        (0..d).map(|i| {
            let (re, im) = raw[i % raw.len()];
            c(re + 0.01 * i as f64, im)
        }),
    );
    StateVector::new(layout.clone(), amps)
        .unwrap()
        .normalized()
        .unwrap()
}

fn mixture(layout: &ModeLayout, parts: &[(f64, &StateVector)]) -> DensityOperator {
    let d = layout.dim();
    let mut m = CMatrix::zeros(d, d);
    let total: f64 = parts.iter().map(|p| p.0).sum();
    for (w, psi) in parts {
        let v = psi.amplitudes();
        m += v * v.adjoint() * c(w / total, 0.0);
    }
    DensityOperator::new(layout.clone(), m).unwrap()
}

#[test]
fn lowering_operator_of_a_qubit() {
    let layout = make_layout(&[], 2).unwrap();
    let s = lowering_op(&layout, 1).unwrap();
    let g = basis_state(&layout, &[], 0).unwrap();
    let e = basis_state(&layout, &[], 1).unwrap();
    assert!((s.apply(&e).unwrap().amplitudes() - g.amplitudes()).norm() == 0.0);
    assert!(s.apply(&g).unwrap().norm() == 0.0);
    assert!(matmul(s.matrix(), s.matrix())
        .iter()
        .all(|z| z.norm() == 0.0));
}

#[test]
fn three_level_projectors_are_orthogonal() {
    let layout = make_layout(&[2], 3).unwrap();
    let p1 = {
        let s = lowering_op(&layout, 1).unwrap();
        matmul(&s.matrix().adjoint(), s.matrix())
    };
    let p2 = {
        let s = lowering_op(&layout, 2).unwrap();
        matmul(&s.matrix().adjoint(), s.matrix())
    };
    assert!(matmul(&p1, &p2).iter().all(|z| z.norm() == 0.0));
    assert_eq!(matmul(&p1, &p1), p1);
    assert!(lowering_op(&make_layout(&[2], 1).unwrap(), 1).is_err());
    let _ = ion_projector(&layout, 2).unwrap();
}

#[test]
fn basis_states_and_bounds() {
    let layout = make_layout(&[2, 2], 2).unwrap();
    let psi = basis_state(&layout, &[(Mode::B1, 1)], 0).unwrap();
    assert_eq!(psi.norm(), 1.0);
    let i = layout.flat_index(&Occupation::new(0, 1, 0, 0)).unwrap();
    assert_eq!(i, 2);
    assert_eq!(psi.amplitudes()[i], c(1.0, 0.0));
    assert!(matches!(
        basis_state(&layout, &[(Mode::A, 2)], 0),
        Err(Error::OutOfRange(_))
    ));
    let l2 = make_layout(&[1, 1, 2], 1).unwrap();
    let s0 = basis_state(&l2, &[], 0).unwrap();
    let s1 = basis_state(&l2, &[(Mode::B2, 1)], 0).unwrap();
    let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let sup = StateVector::superposition(&[(h, &s0), (h, &s1)]).unwrap();
    assert!((sup.norm() - 1.0).abs() < 1e-15);
}

#[test]
fn basis_states_are_orthonormal() {
    let layout = make_layout(&[2, 3, 2], 2).unwrap();
    let states: Vec<StateVector> = (0..layout.dim())
        .map(|i| StateVector::basis(&layout, &layout.occupation(i)).unwrap())
        .collect();
    for (i, x) in states.iter().enumerate() {
        for (j, y) in states.iter().enumerate() {
            let z = x.overlap(y).unwrap();
            assert_eq!(z, c(if i == j { 1.0 } else { 0.0 }, 0.0));
        }
    }
}

#[test]
fn noon_branches_are_orthogonal() {
    let layout = make_layout(&[4, 4, 2], 2).unwrap();
    for n in 1..=3 {
        // Put both targets on the same ion level to compare the mode parts.
        let plus = noon_target(&layout, n, IonOutcome::Ground).unwrap();
        let x = basis_state(&layout, &[(Mode::A, n)], 0).unwrap();
        let y = basis_state(&layout, &[(Mode::B1, n)], 0).unwrap();
        let minus = StateVector::superposition(&[(c(1.0, 0.0), &x), (c(0.0, -1.0), &y)])
            .unwrap()
            .normalized()
            .unwrap();
        assert!(plus.overlap(&minus).unwrap().norm() < 1e-16);
    }
}

#[test]
fn commutator_is_one_below_the_top_level() {
    let layout = make_layout(&[5, 3], 1).unwrap();
    for m in [Mode::A, Mode::B1] {
        let a = ladder_op(&layout, m).unwrap();
        let ad = creation_op(&layout, m).unwrap();
        let comm = matmul(a.matrix(), ad.matrix()) - matmul(ad.matrix(), a.matrix());
        let top = layout.cutoff(m).unwrap() - 1;
        for i in 0..layout.dim() {
            let n = layout.occupation(i).of(m);
            if n < top {
                assert!((comm[(i, i)] - 1.0).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn fidelity_examples() {
    let layout = make_layout(&[3], 1).unwrap();
    let zero = basis_state(&layout, &[], 0).unwrap();
    let one = basis_state(&layout, &[(Mode::A, 1)], 0).unwrap();
    assert_eq!(state_fidelity(&zero, &zero).unwrap(), 1.0);
    assert_eq!(state_fidelity(&zero, &one).unwrap(), 0.0);
    let x = state_from(&layout, &[(0.3, 0.1), (-0.5, 0.7)]);
    let y = state_from(&layout, &[(1.0, 0.0), (0.2, -0.4)]);
    let pure = state_fidelity(&x, &y).unwrap();
    let mixed = state_fidelity(&x.to_density(), &y.to_density()).unwrap();
    assert!((pure - mixed).abs() < 1e-10, "{pure} vs {mixed}");
    assert!((mixed_pure_fidelity(&x.to_density(), &y).unwrap() - pure).abs() < 1e-12);
}

#[test]
fn partial_trace_of_product_and_noon_states() {
    let layout = make_layout(&[3, 3, 2], 2).unwrap();
    let n = 2;
    let target = noon_target(&layout, n, IonOutcome::Excited).unwrap();
    let reduced = partial_trace(
        &target.to_density(),
        &[Subsystem::Mode(Mode::A), Subsystem::Mode(Mode::B1)],
    )
    .unwrap();
    let modes = reduced.layout().clone();
    let x = basis_state(&modes, &[(Mode::A, n)], 0).unwrap();
    let y = basis_state(&modes, &[(Mode::B1, n)], 0).unwrap();
    let noon = StateVector::superposition(&[(c(1.0, 0.0), &x), (c(0.0, -1.0), &y)])
        .unwrap()
        .normalized()
        .unwrap();
    assert!((mixed_pure_fidelity(&reduced, &noon).unwrap() - 1.0).abs() < 1e-12);
    assert!(partial_trace(&target.to_density(), &[]).is_err());

    // Product state: the reduced state of a factor is that factor.
    let prod = basis_state(&layout, &[(Mode::A, 1), (Mode::B2, 1)], 1).unwrap();
    let ra = partial_trace(&prod.to_density(), &[Subsystem::Mode(Mode::A)]).unwrap();
    assert_eq!(ra.matrix()[(1, 1)], c(1.0, 0.0));
    assert!((ra.trace() - 1.0).norm() < 1e-12);
}

#[test]
fn density_constructor_checks_invariants() {
    let layout = make_layout(&[2], 1).unwrap();
    let mut m = CMatrix::identity(2, 2) * c(0.5, 0.0);
    m[(0, 1)] = c(0.1, 0.0);
    assert!(matches!(
        DensityOperator::new(layout.clone(), m),
        Err(Error::InvalidState(_))
    ));
    let m = CMatrix::identity(2, 2);
    assert!(DensityOperator::new(layout, m).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn overlap_is_sesquilinear_and_bounded(
        a in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8),
        b in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8),
    ) {
        let layout = make_layout(&[3, 2], 2).unwrap();
        let x = state_from(&layout, &a);
        let y = state_from(&layout, &b);
        let xy = x.overlap(&y).unwrap();
        prop_assert!((xy - y.overlap(&x).unwrap().conj()).norm() < 1e-15);
        prop_assert!(xy.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity(
        a in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6),
        b in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6),
        w in 0.05f64..0.95,
    ) {
        let layout = make_layout(&[3, 2], 2).unwrap();
        let x = state_from(&layout, &a);
        let y = state_from(&layout, &b);
        let rho = mixture(&layout, &[(w, &x), (1.0 - w, &y)]);
        for keep in [vec![Subsystem::Mode(Mode::A)], vec![Subsystem::Mode(Mode::B1), Subsystem::Ion]] {
            let r = partial_trace(&rho, &keep).unwrap();
            prop_assert!((r.trace() - 1.0).norm() < 1e-12);
            prop_assert!(r.min_eigenvalue() >= -1e-10);
        }
    }
}
