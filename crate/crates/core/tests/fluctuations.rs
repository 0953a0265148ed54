// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use noonforge::fluctuations::{
    analytic_avg_overlap, avg_exp, avg_sin_cos, cell_seed, closed_form_overlap, fidelity_sweep,
    gaussian_moment, mc_fidelity, FluctuationSpec, REFERENCE_PERCENTS,
};
use noonforge::protocol::{fluctuating_state, noon_target, protocol_layout, IonOutcome};
use noonforge::{Mode, Occupation, StateVector};
use num_complex::Complex64;
use proptest::prelude::*;

/// Trapezoid rule against a Gaussian density over +-10 standard deviations.
/// For smooth integrands the rule converges geometrically.
fn gaussian_expectation_1d(v: f64, points: usize, f: impl Fn(f64) -> Complex64) -> Complex64 {
    if v == 0.0 {
        return f(0.0);
    }
    let sd = v.sqrt();
    let h = 20.0 * sd / (points - 1) as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..points {
        let x = -10.0 * sd + i as f64 * h;
        let w = (-x * x / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
        acc += f(x) * w * h;
    }
    acc
}

fn grid_average_overlap(n: usize, spec: &FluctuationSpec) -> Complex64 {
    gaussian_expectation_1d(spec.v_lambda, 161, |dl| {
        gaussian_expectation_1d(spec.v_theta, 161, |dt| closed_form_overlap(n, dl, dt))
    })
}

#[test]
fn analytic_average_matches_grid_quadrature() {
    for &m in &[1.0, 5.0, 15.0, 50.0] {
        let spec = FluctuationSpec::from_percent(m).unwrap();
        for n in [0, 1, 2, 5, 12, 25] {
            let a = analytic_avg_overlap(n, &spec).unwrap();
            let g = grid_average_overlap(n, &spec);
            assert!((a - g).norm() < 1e-11, "N={n} M={m}: {a} vs {g}");
        }
    }
}

#[test]
fn zero_variance_gives_unit_overlap() {
    let spec = FluctuationSpec::new(0.0, 0.0).unwrap();
    for n in 0..=40 {
        let a = analytic_avg_overlap(n, &spec).unwrap();
        assert!((a - 1.0).norm() < 1e-12, "N={n}: {a}");
    }
}

#[test]
fn n_zero_is_exactly_one_for_all_percents() {
    for &m in &REFERENCE_PERCENTS {
        let spec = FluctuationSpec::from_percent(m).unwrap();
        let a = analytic_avg_overlap(0, &spec).unwrap();
        assert!((a - 1.0).norm() < 1e-15);
    }
}

#[test]
fn analytic_average_is_real_up_to_n_sixty() {
    let mut worst = 0.0f64;
    for &m in &REFERENCE_PERCENTS {
        let spec = FluctuationSpec::from_percent(m).unwrap();
        for n in 0..=60 {
            let a = analytic_avg_overlap(n, &spec).unwrap();
            assert!(a.norm() <= 1.0 + 1e-10, "N={n} M={m}: |a| = {}", a.norm());
            worst = worst.max(a.im.abs());
        }
    }
    assert!(worst <= 1e-10, "largest imaginary part {worst:e}");
}

#[test]
fn single_quantum_hand_evaluation() {
    for vt in [0.0, 0.3, (PI / 2.0).powi(2)] {
        let a = analytic_avg_overlap(1, &FluctuationSpec::new(0.0, vt).unwrap()).unwrap();
        let expect = (3.0 + (-vt / 2.0).exp()) / 4.0;
        assert!((a - expect).norm() < 1e-15, "{a} vs {expect}");
    }
}

#[test]
fn closed_form_matches_state_vector_pipeline() {
    for n in [1, 2, 3, 5] {
        let layout = protocol_layout(n).unwrap();
        let ideal = fluctuating_state(n, &layout, PI / 4.0, PI).unwrap();
        for (dl, dt) in [(0.01, -0.2), (-0.07, 0.3), (0.2, 1.1)] {
            let noisy = fluctuating_state(n, &layout, PI / 4.0 + dl, PI + dt).unwrap();
            let z = ideal.overlap(&noisy).unwrap();
            let c = closed_form_overlap(n, dl, dt);
            assert!((z - c).norm() < 1e-12, "N={n}: {z} vs {c}");
        }
    }
}

#[test]
fn noon_target_has_unit_norm() {
    let layout = protocol_layout(3).unwrap();
    let t = noon_target(&layout, 3, IonOutcome::Ground).unwrap();
    assert!((t.norm() - 1.0).abs() < 1e-15);
    let x = StateVector::basis(&layout, &Occupation::new(3, 0, 0, 0)).unwrap();
    assert!((t.overlap(&x).unwrap().norm() - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(layout.cutoff(Mode::A), Some(5));
}

#[test]
fn gaussian_moments_match_closed_form() {
    let v = 0.37;
    assert_eq!(gaussian_moment(0, v).unwrap(), 1.0);
    assert_eq!(gaussian_moment(3, v).unwrap(), 0.0);
    assert!((gaussian_moment(2, v).unwrap() - v).abs() < 1e-16);
    assert!((gaussian_moment(4, v).unwrap() - 3.0 * v * v).abs() < 1e-15);
    assert!((gaussian_moment(6, v).unwrap() - 15.0 * v.powi(3)).abs() < 1e-15);
    assert!(gaussian_moment(2, -1.0).is_err());
}

#[test]
fn avg_exp_matches_quadrature() {
    for (n, v) in [(1i64, 0.1), (3, 0.02), (-4, 0.5)] {
        let q = gaussian_expectation_1d(v, 401, |x| Complex64::from_polar(1.0, n as f64 * x));
        assert!((q - avg_exp(n, v)).norm() < 1e-12);
    }
}

#[test]
fn avg_sin_cos_matches_quadrature() {
    for (n, m, v) in [(1, 0, 0.01), (2, 3, 0.05), (4, 4, 0.3)] {
        let q = gaussian_expectation_1d(v, 401, |x| {
            let (s, c) = (PI / 4.0 + x).sin_cos();
            Complex64::new(s.powi(n as i32) * c.powi(m as i32), 0.0)
        });
        let a = avg_sin_cos(n, m, v);
        assert!((a - q).norm() < 1e-12, "({n},{m},{v}): {a} vs {q}");
    }
}

#[test]
fn single_quantum_monte_carlo_agrees_with_analytic() {
    let spec = FluctuationSpec::from_percent(15.0).unwrap();
    let r = mc_fidelity(1, &spec, 200_000, 7).unwrap();
    let dev = (r.mc_mean_complex - r.analytic_complex).norm();
    assert!(
        dev < 4.0 * r.mc_stderr_complex,
        "{dev} vs {}",
        r.mc_stderr_complex
    );
}

#[test]
fn monte_carlo_is_deterministic_given_seed() {
    let spec = FluctuationSpec::from_percent(5.0).unwrap();
    let a = mc_fidelity(7, &spec, 1000, 99).unwrap();
    let b = mc_fidelity(7, &spec, 1000, 99).unwrap();
    assert_eq!(a.mc_mean.to_bits(), b.mc_mean.to_bits());
    assert_eq!(a.mc_mean_complex, b.mc_mean_complex);
    let c = mc_fidelity(7, &spec, 1000, 100).unwrap();
    assert_ne!(a.mc_mean.to_bits(), c.mc_mean.to_bits());
}

#[test]
fn sweep_rows_are_ordered_and_seeded_per_cell() {
    let rows = fidelity_sweep(3, &[1.0, 50.0], 100, 42).unwrap();
    assert_eq!(rows.len(), 8);
    for (i, r) in rows.iter().enumerate() {
        let m = [1.0, 50.0][i % 2];
        assert_eq!(r.n, i / 2);
        assert_eq!(r.spec.percent, Some(m));
        assert_eq!(r.seed, cell_seed(42, r.n, m));
    }
    for r in rows.iter().filter(|r| r.n == 0) {
        assert!((r.mc_mean - 1.0).abs() < 1e-15 && (r.analytic - 1.0).abs() < 1e-15);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(FluctuationSpec::new(-1e-3, 0.0).is_err());
    assert!(FluctuationSpec::from_percent(f64::NAN).is_err());
    let spec = FluctuationSpec::from_percent(1.0).unwrap();
    assert!(mc_fidelity(2, &spec, 0, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn overlap_magnitude_shrinks_with_variance(n in 1usize..30, m in 0.5f64..40.0, k in 1.05f64..3.0) {
        let lo = analytic_avg_overlap(n, &FluctuationSpec::from_percent(m).unwrap()).unwrap();
        let hi = analytic_avg_overlap(n, &FluctuationSpec::from_percent(m * k).unwrap()).unwrap();
        prop_assert!(hi.norm() <= lo.norm() + 1e-12);
    }

    #[test]
    fn single_realisation_overlap_is_bounded(n in 0usize..40, dl in -1.0f64..1.0, dt in -3.0f64..3.0) {
        prop_assert!(closed_form_overlap(n, dl, dt).norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn even_moments_grow_with_order(k in 1u32..20, v in 1e-3f64..2.0) {
        let a = gaussian_moment(2 * k, v).unwrap();
        let b = gaussian_moment(2 * k + 2, v).unwrap();
        prop_assert!((b / a - (2 * k + 1) as f64 * v).abs() <= 1e-12 * (2 * k + 1) as f64 * v);
    }
}
