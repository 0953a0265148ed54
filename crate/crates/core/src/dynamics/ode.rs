// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Dormand-Prince 5(4) integrator over an abstract vector space.
//!
//! The same tableau serves two purposes. In adaptive mode the embedded
//! fourth-order solution estimates the local error and the step is
//! resized with the usual `err^(-1/5)` controller. In fixed mode the step
//! is taken as given, which makes reruns bit-identical independently of
//! error-estimate rounding.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Absolute and relative tolerances of the adaptive controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-8,
        }
    }
}

/// Step-size policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StepControl {
    /// Embedded error control.
    #[default]
    Adaptive,
    /// Constant step `dt` (the last step before each output time is shortened).
    Fixed { dt: f64 },
}

/// Counters reported by an integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// State types the integrator can advance.
pub trait OdeState: Clone {
    /// `self += a * x`.
    fn axpy(&mut self, a: f64, x: &Self);
    /// Largest `err_i / (abs + rel * max(|y0_i|, |y1_i|))`.
    ///
    /// The maximum rather than the root-mean-square is used so that a
    /// small number of badly resolved entries (for instance near-zero
    /// eigen-directions of a density matrix) cannot hide behind many
    /// well-resolved ones.
    fn error_norm(err: &Self, y0: &Self, y1: &Self, tol: &Tolerance) -> f64;
    /// `true` if every component is finite.
    fn is_finite(&self) -> bool;
}

fn max_scaled_error<'a>(
    err: impl Iterator<Item = &'a Complex64>,
    y0: impl Iterator<Item = &'a Complex64>,
    y1: impl Iterator<Item = &'a Complex64>,
    tol: &Tolerance,
) -> f64 {
    let mut worst: f64 = 0.0;
    for ((e, a), b) in err.zip(y0).zip(y1) {
        let sc = tol.abs + tol.rel * a.norm().max(b.norm());
        worst = worst.max(e.norm() / sc);
    }
    worst
}

impl OdeState for CMatrix {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x.iter()) {
            *s += v * a;
        }
    }
    fn error_norm(err: &Self, y0: &Self, y1: &Self, tol: &Tolerance) -> f64 {
        max_scaled_error(err.iter(), y0.iter(), y1.iter(), tol)
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl OdeState for DVector<Complex64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x.iter()) {
            *s += v * a;
        }
    }
    fn error_norm(err: &Self, y0: &Self, y1: &Self, tol: &Tolerance) -> f64 {
        max_scaled_error(err.iter(), y0.iter(), y1.iter(), tol)
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Settings of one integration.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub tolerance: Tolerance,
    pub control: StepControl,
    /// Hard limit on accepted plus rejected steps.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            tolerance: Tolerance::default(),
            control: StepControl::Adaptive,
            max_steps: 50_000_000,
        }
    }
}

/// Integrates `dy/dt = f(t, y)` from `t0` through the increasing output
/// times `outputs`, calling `observe(t, y)` at each of them.
///
/// `post_step` runs after every accepted step and may project the state
/// back onto a constraint manifold (the master equation uses it to
/// re-symmetrise the density matrix).
pub fn integrate<S, F, P, O>(
    mut f: F,
    t0: f64,
    y0: S,
    outputs: &[f64],
    opts: &OdeOptions,
    mut post_step: P,
    mut observe: O,
) -> Result<(S, OdeStats)>
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
    P: FnMut(&mut S),
    O: FnMut(f64, &S) -> Result<()>,
{
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0;
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&o| o < t0) {
        return Err(Error::InvalidArgument(
            "output times must be non-decreasing and not before t0".into(),
        ));
    }
    let t_end = outputs.last().copied().unwrap_or(t0);
    let span = (t_end - t0).abs();
    let mut k1 = f(t, &y);
    stats.rhs_evals += 1;
    let mut h = match opts.control {
        StepControl::Fixed { dt } => {
            if !(dt > 0.0) {
                return Err(Error::InvalidArgument("fixed step must be positive".into()));
            }
            dt
        }
        StepControl::Adaptive => initial_step(&y, &k1, span, &opts.tolerance),
    };
    let mut steps = 0usize;
    for &t_out in outputs {
        while t < t_out {
            if steps >= opts.max_steps {
                return Err(Error::IntegrationFailure(format!(
                    "step budget of {} exhausted at t = {t:.6e} (target {t_out:.6e})",
                    opts.max_steps
                )));
            }
            steps += 1;
            let remaining = t_out - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step <= 1e-15 * t.abs().max(span) {
                if remaining <= 1e-15 * t.abs().max(span) {
                    t = t_out;
                    break;
                }
                return Err(Error::IntegrationFailure(format!(
                    "step size underflow ({step:.3e}) at t = {t:.6e}"
                )));
            }
            let (y_new, err) = dp_step(&mut f, t, &y, &k1, step, &mut stats);
            match opts.control {
                StepControl::Fixed { .. } => {
                    if !y_new.is_finite() {
                        return Err(Error::IntegrationFailure(format!(
                            "non-finite state at t = {t:.6e}"
                        )));
                    }
                    t = if last { t_out } else { t + step };
                    y = y_new;
                    post_step(&mut y);
                    k1 = f(t, &y);
                    stats.rhs_evals += 1;
                    stats.accepted += 1;
                }
                StepControl::Adaptive => {
                    let en = S::error_norm(&err, &y, &y_new, &opts.tolerance);
                    if en <= 1.0 && y_new.is_finite() {
                        t = if last { t_out } else { t + step };
                        y = y_new;
                        post_step(&mut y);
                        // The projection may move y slightly, so the slope is
                        // re-evaluated instead of reusing the last stage.
                        k1 = f(t, &y);
                        stats.rhs_evals += 1;
                        stats.accepted += 1;
                        let fac = if en == 0.0 {
                            5.0
                        } else {
                            (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        // Keep the nominal step when this one was shortened
                        // only to land on an output time.
                        h = if last { h.max(step * fac) } else { step * fac };
                    } else {
                        stats.rejected += 1;
                        let fac = if en.is_finite() {
                            (0.9 * en.powf(-0.2)).clamp(0.1, 0.9)
                        } else {
                            0.1
                        };
                        h = step * fac;
                    }
                }
            }
        }
        observe(t_out, &y)?;
    }
    Ok((y, stats))
}

fn dp_step<S, F>(f: &mut F, t: f64, y: &S, k1: &S, h: f64, stats: &mut OdeStats) -> (S, S)
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    let mut ks: Vec<S> = Vec::with_capacity(7);
    ks.push(k1.clone());
    for i in 1..7 {
        let mut yi = y.clone();
        for (j, kj) in ks.iter().enumerate() {
            let a = A[i][j];
            if a != 0.0 {
                yi.axpy(h * a, kj);
            }
        }
        if i == 6 {
            // Stage 7 is evaluated at the fifth-order solution itself.
            let k7 = f(t + C[i] * h, &yi);
            stats.rhs_evals += 1;
            ks.push(k7);
            // err = h * sum_j E_j k_j, seeded from k_1 since S has no zero.
            let mut err = ks[0].clone();
            err.axpy(h * E[0] - 1.0, &ks[0]);
            for (j, kj) in ks.iter().enumerate().skip(1) {
                if E[j] != 0.0 {
                    err.axpy(h * E[j], kj);
                }
            }
            return (yi, err);
        }
        let ki = f(t + C[i] * h, &yi);
        stats.rhs_evals += 1;
        ks.push(ki);
    }
    unreachable!()
}

fn initial_step<S: OdeState>(y: &S, f0: &S, span: f64, tol: &Tolerance) -> f64 {
    // Ratio of the scaled state norm to the scaled slope norm, as in
    // Hairer, Norsett and Wanner's starting-step heuristic.
    let d0 = S::error_norm(y, y, y, tol);
    let d1 = S::error_norm(f0, y, y, tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * span.max(1e-300)
    } else {
        0.01 * d0 / d1
    };
    h0.min(span.max(f64::MIN_POSITIVE)).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(t_end: f64, control: StepControl) -> (DVector<Complex64>, OdeStats) {
        let lambda = Complex64::new(-1.0, 20.0);
        let y0 = DVector::from_element(1, Complex64::new(1.0, 0.0));
        let opts = OdeOptions {
            tolerance: Tolerance {
                abs: 1e-12,
                rel: 1e-10,
            },
            control,
            ..Default::default()
        };
        integrate(
            |_, y: &DVector<Complex64>| y * lambda,
            0.0,
            y0,
            &[t_end],
            &opts,
            |_| {},
            |_, _| Ok(()),
        )
        .unwrap()
    }

    #[test]
    fn adaptive_matches_exponential() {
        let (y, stats) = decay(2.0, StepControl::Adaptive);
        let exact = (Complex64::new(-1.0, 20.0) * 2.0).exp();
        assert!((y[0] - exact).norm() < 1e-8, "{} vs {exact}", y[0]);
        assert!(stats.accepted > 10);
    }

    #[test]
    fn fixed_step_is_fifth_order() {
        let exact = (Complex64::new(-1.0, 20.0) * 1.0).exp();
        let e1 = (decay(1.0, StepControl::Fixed { dt: 1e-2 }).0[0] - exact).norm();
        let e2 = (decay(1.0, StepControl::Fixed { dt: 5e-3 }).0[0] - exact).norm();
        let order = (e1 / e2).log2();
        assert!(order > 4.5 && order < 5.6, "observed order {order}");
    }
}
