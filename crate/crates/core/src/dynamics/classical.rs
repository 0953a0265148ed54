// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Mean-field equations of the optomechanical system.
//!
//! ```text
//! d alpha/dt = -(Gamma + i nu) alpha + i g0 |beta|^2
//! d beta/dt  = -[gamma + i Delta1 - i g0 (alpha + alpha*)] beta + i E
//! ```
//!
//! The linear parts rotate at `nu` and `Delta1`, which at the feasibility
//! point are nine orders of magnitude faster than the decay rates. The
//! trajectory solver therefore integrates the linear part exactly with an
//! exponential Runge-Kutta scheme (Cox-Matthews ETDRK4) and controls the
//! error by step doubling. Only the nonlinear coupling limits the step.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::ode::Tolerance;
use crate::error::{invalid_arg, Error, Result};
use crate::params::PhysicalParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Coherent amplitudes of the motion (`alpha`) and of cavity 1 (`beta`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassicalState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl ClassicalState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        ClassicalState { alpha, beta }
    }

    fn is_finite(&self) -> bool {
        [self.alpha.re, self.alpha.im, self.beta.re, self.beta.im]
            .iter()
            .all(|x| x.is_finite())
    }

    fn max_abs(&self) -> f64 {
        self.alpha.norm().max(self.beta.norm())
    }
}

/// Right-hand side of the mean-field equations.
pub fn classical_rhs(p: &PhysicalParams, s: &ClassicalState) -> ClassicalState {
    let g0 = p.g0();
    ClassicalState {
        alpha: -Complex64::new(p.gamma_motion, p.nu) * s.alpha + I * g0 * s.beta.norm_sqr(),
        beta: -Complex64::new(p.gamma, p.delta1 - 2.0 * g0 * s.alpha.re) * s.beta + I * p.pump,
    }
}

/// Residual of the mean-field equations relative to the size of the terms
/// that cancel at a fixed point.
///
/// For each equation the modulus of the right-hand side is divided by the
/// sum of the moduli of its terms (or 1 if they all vanish); the larger
/// of the two ratios is returned. A value near `1e-16` means the fixed
/// point is exact to rounding.
pub fn steady_residual(p: &PhysicalParams, s: &ClassicalState) -> f64 {
    let g0 = p.g0();
    let f = classical_rhs(p, s);
    let scale_a =
        Complex64::new(p.gamma_motion, p.nu).norm() * s.alpha.norm() + g0.abs() * s.beta.norm_sqr();
    let scale_b = Complex64::new(p.gamma, p.delta1 - 2.0 * g0 * s.alpha.re).norm() * s.beta.norm()
        + p.pump.norm();
    let ra = if scale_a > 0.0 {
        f.alpha.norm() / scale_a
    } else {
        f.alpha.norm()
    };
    let rb = if scale_b > 0.0 {
        f.beta.norm() / scale_b
    } else {
        f.beta.norm()
    };
    ra.max(rb)
}

/// Options of the steady-state solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOptions {
    /// Mixing weight of the new iterate in the damped fixed-point map.
    pub damping: f64,
    pub max_iterations: usize,
    /// Required [`steady_residual`].
    pub tolerance: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            damping: 0.5,
            max_iterations: 100_000,
            tolerance: 1e-12,
        }
    }
}

/// Which branch of the solver produced the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethod {
    FixedPoint,
    Newton,
}

/// Steady state with convergence information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyReport {
    pub state: ClassicalState,
    pub residual: f64,
    pub iterations: usize,
    pub method: SteadyMethod,
}

fn fixed_point_map(p: &PhysicalParams, s: &ClassicalState) -> ClassicalState {
    let g0 = p.g0();
    let alpha = g0 * s.beta.norm_sqr() / Complex64::new(p.nu, -p.gamma_motion);
    let beta = p.pump / Complex64::new(p.delta1 - 2.0 * g0 * alpha.re, -p.gamma);
    ClassicalState { alpha, beta }
}

/// Steady state with default options.
pub fn classical_steady_state(p: &PhysicalParams) -> Result<ClassicalState> {
    Ok(classical_steady_state_with(p, &SteadyOptions::default())?.state)
}

/// Solves `alpha = g0 |beta|^2 / (nu - i Gamma)`,
/// `beta = E / [Delta1 - g0 (alpha + alpha*) - i gamma]`.
///
/// A damped fixed-point iteration runs first. If it has not reached the
/// tolerance after `max_iterations`, Newton's method on the real
/// four-vector `(Re alpha, Im alpha, Re beta, Im beta)` takes over from the
/// last iterate, using the stability matrix as Jacobian.
pub fn classical_steady_state_with(
    p: &PhysicalParams,
    opts: &SteadyOptions,
) -> Result<SteadyReport> {
    p.try_g0()?;
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return invalid_arg("damping must lie in (0, 1]");
    }
    let mut s = ClassicalState::default();
    let mut best = (f64::INFINITY, s);
    for it in 1..=opts.max_iterations {
        let next = fixed_point_map(p, &s);
        s = ClassicalState {
            alpha: s.alpha + (next.alpha - s.alpha) * opts.damping,
            beta: s.beta + (next.beta - s.beta) * opts.damping,
        };
        if !s.is_finite() {
            break;
        }
        let r = steady_residual(p, &s);
        if r < best.0 {
            best = (r, s);
        }
        let change = (next.alpha - s.alpha)
            .norm()
            .max((next.beta - s.beta).norm());
        if r <= 0.01 * opts.tolerance || change <= f64::EPSILON * s.max_abs() {
            if r <= opts.tolerance {
                return Ok(SteadyReport {
                    state: s,
                    residual: r,
                    iterations: it,
                    method: SteadyMethod::FixedPoint,
                });
            }
            break;
        }
    }
    if best.0 <= opts.tolerance {
        return Ok(SteadyReport {
            state: best.1,
            residual: best.0,
            iterations: opts.max_iterations,
            method: SteadyMethod::FixedPoint,
        });
    }
    newton(p, best.1, opts)
}

fn newton(p: &PhysicalParams, start: ClassicalState, opts: &SteadyOptions) -> Result<SteadyReport> {
    let mut s = start;
    let mut r = steady_residual(p, &s);
    for it in 1..=100 {
        let f = classical_rhs(p, &s);
        let m = stability_matrix(p, &s);
        // Real Jacobian of (Re f_a, Im f_a, Re f_b, Im f_b) with respect to
        // (Re a, Im a, Re b, Im b), from the Wirtinger derivatives in M.
        let mut jr = nalgebra::Matrix4::<f64>::zeros();
        for (row, mrow) in [(0usize, 0usize), (2, 2)] {
            for (col, mcol) in [(0usize, 0usize), (2, 2)] {
                let d_dx = m[(mrow, mcol)] + m[(mrow, mcol + 1)];
                let d_dy = I * (m[(mrow, mcol)] - m[(mrow, mcol + 1)]);
                jr[(row, col)] = d_dx.re;
                jr[(row + 1, col)] = d_dx.im;
                jr[(row, col + 1)] = d_dy.re;
                jr[(row + 1, col + 1)] = d_dy.im;
            }
        }
        let rhs = nalgebra::Vector4::new(-f.alpha.re, -f.alpha.im, -f.beta.re, -f.beta.im);
        let Some(dx) = jr.lu().solve(&rhs) else {
            break;
        };
        s.alpha += Complex64::new(dx[0], dx[1]);
        s.beta += Complex64::new(dx[2], dx[3]);
        r = steady_residual(p, &s);
        if !s.is_finite() {
            break;
        }
        if r <= opts.tolerance {
            return Ok(SteadyReport {
                state: s,
                residual: r,
                iterations: it,
                method: SteadyMethod::Newton,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual: r,
        last: (s.alpha, s.beta),
    })
}

/// Linear stability matrix in the variables
/// `(d alpha, d alpha*, d beta, d beta*)`.
pub fn stability_matrix(p: &PhysicalParams, s: &ClassicalState) -> Matrix4<Complex64> {
    let g0 = p.g0();
    let (a, b) = (s.alpha, s.beta);
    let z = Complex64::new(0.0, 0.0);
    let ig = I * g0;
    let db = Complex64::new(-p.gamma, -(p.delta1 - 2.0 * g0 * a.re));
    Matrix4::new(
        Complex64::new(-p.gamma_motion, -p.nu),
        z,
        ig * b.conj(),
        ig * b,
        z,
        Complex64::new(-p.gamma_motion, p.nu),
        -ig * b.conj(),
        -ig * b,
        ig * b,
        ig * b,
        db,
        z,
        -ig * b.conj(),
        -ig * b.conj(),
        z,
        db.conj(),
    )
}

/// Stability matrix, its eigenvalues and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Row-major entries of `M`.
    pub matrix_m: [[Complex64; 4]; 4],
    pub eigenvalues: [Complex64; 4],
    /// Largest `||M v - lambda v|| / ||M||` over the computed eigenpairs.
    pub eigen_residual: f64,
    /// All eigenvalues have negative real part.
    pub stable: bool,
}

/// Residual above which [`stability_analysis`] rejects its input as not
/// being a fixed point.
pub const FIXED_POINT_CHECK: f64 = 1e-9;

/// Builds `M` at `steady` and classifies the fixed point.
pub fn stability_analysis(p: &PhysicalParams, steady: &ClassicalState) -> Result<StabilityReport> {
    let r = steady_residual(p, steady);
    if !(r <= FIXED_POINT_CHECK) {
        return invalid_arg(format!(
            "input is not a fixed point (relative residual {r:.3e})"
        ));
    }
    let m = stability_matrix(p, steady);
    let schur = nalgebra::Schur::new(m);
    let (_, t) = schur.unpack();
    let mut eigenvalues = [Complex64::new(0.0, 0.0); 4];
    for (k, e) in eigenvalues.iter_mut().enumerate() {
        *e = t[(k, k)];
    }
    eigenvalues.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let norm = m.norm();
    let mut eigen_residual: f64 = 0.0;
    for &lam in &eigenvalues {
        let v = null_vector(&(m - Matrix4::identity() * lam));
        let res = (m * v - v * lam).norm() / norm.max(f64::MIN_POSITIVE);
        eigen_residual = eigen_residual.max(res);
    }
    let mut matrix_m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in matrix_m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m[(i, j)];
        }
    }
    let stable = eigenvalues.iter().all(|e| e.re < 0.0);
    Ok(StabilityReport {
        matrix_m,
        eigenvalues,
        eigen_residual,
        stable,
    })
}

/// Right singular vector of the smallest singular value.
fn null_vector(a: &Matrix4<Complex64>) -> Vector4<Complex64> {
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("four singular values");
    let row = v_t.row(k);
    Vector4::new(row[0].conj(), row[1].conj(), row[2].conj(), row[3].conj())
}

/// Tolerances and limits of the trajectory solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOptions {
    pub tolerance: Tolerance,
    /// Amplitude above which the run is declared divergent.
    pub overflow: f64,
    pub max_steps: usize,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        TrajectoryOptions {
            tolerance: Tolerance::default(),
            overflow: 1e100,
            max_steps: 20_000_000,
        }
    }
}

/// Trajectory from `a0` over `[0, t]`, sampled at `samples + 1` equally
/// spaced times.
pub fn classical_trajectory(
    p: &PhysicalParams,
    a0: ClassicalState,
    t: f64,
    samples: usize,
) -> Result<Vec<(f64, ClassicalState)>> {
    classical_trajectory_with(p, a0, t, samples, &TrajectoryOptions::default())
}

/// [`classical_trajectory`] with explicit options.
pub fn classical_trajectory_with(
    p: &PhysicalParams,
    a0: ClassicalState,
    t: f64,
    samples: usize,
    opts: &TrajectoryOptions,
) -> Result<Vec<(f64, ClassicalState)>> {
    p.try_g0()?;
    if !a0.is_finite() {
        return invalid_arg("initial amplitudes must be finite");
    }
    if !(t >= 0.0) || !t.is_finite() || samples == 0 {
        return invalid_arg("need a finite t >= 0 and at least one sample interval");
    }
    let lin = [
        -Complex64::new(p.gamma_motion, p.nu),
        -Complex64::new(p.gamma, p.delta1),
    ];
    let g0 = p.g0();
    let pump = p.pump;
    let nonlin = move |s: &[Complex64; 2]| -> [Complex64; 2] {
        [
            I * g0 * s[1].norm_sqr(),
            I * g0 * 2.0 * s[0].re * s[1] + I * pump,
        ]
    };
    let mut out = Vec::with_capacity(samples + 1);
    let mut y = [a0.alpha, a0.beta];
    let mut tc = 0.0;
    out.push((0.0, a0));
    // Start from a step that resolves the faster of the slow scales.
    let slow = p
        .gamma
        .max(p.gamma_motion)
        .max(g0.abs() * (1.0 + a0.beta.norm_sqr()).sqrt())
        .max(1e-300);
    let mut h = (0.01 / slow).min(t.max(f64::MIN_POSITIVE));
    let mut steps = 0usize;
    for k in 1..=samples {
        let t_out = t * k as f64 / samples as f64;
        while tc < t_out {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::IntegrationFailure(format!(
                    "step budget exhausted at t = {tc:.6e}"
                )));
            }
            let remaining = t_out - tc;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step <= 1e-15 * t_out {
                return Err(Error::IntegrationFailure(format!(
                    "step size underflow at t = {tc:.6e}"
                )));
            }
            let full = etdrk4_step(&lin, &nonlin, &y, step);
            let half = etdrk4_step(&lin, &nonlin, &y, 0.5 * step);
            let two = etdrk4_step(&lin, &nonlin, &half, 0.5 * step);
            let mut en: f64 = 0.0;
            for i in 0..2 {
                let sc = opts.tolerance.abs + opts.tolerance.rel * y[i].norm().max(two[i].norm());
                en = en.max((two[i] - full[i]).norm() / 15.0 / sc);
            }
            let finite = two.iter().all(|z| z.re.is_finite() && z.im.is_finite());
            if en <= 1.0 && finite {
                y = two;
                tc = if last { t_out } else { tc + step };
                if y.iter().any(|z| z.norm() > opts.overflow) {
                    return Err(Error::IntegrationFailure(format!(
                        "amplitudes exceeded {:.1e} at t = {tc:.6e}",
                        opts.overflow
                    )));
                }
                let fac = if en == 0.0 {
                    4.0
                } else {
                    (0.9 * en.powf(-0.2)).clamp(0.2, 4.0)
                };
                h = if last { h.max(step * fac) } else { step * fac };
            } else {
                h = step
                    * if en.is_finite() {
                        (0.9 * en.powf(-0.2)).clamp(0.1, 0.9)
                    } else {
                        0.1
                    };
            }
        }
        out.push((
            t_out,
            ClassicalState {
                alpha: y[0],
                beta: y[1],
            },
        ));
    }
    Ok(out)
}

/// `phi_1, phi_2, phi_3` at `z`, by Taylor series near the origin.
fn phis(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 0.5 {
        // phi_k(z) = sum_m z^m / (m + k)!
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, o) in out.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0 / factorial(k + 1), 0.0);
            let mut acc = term;
            for m in 1..30 {
                term = term * z / (m + k + 1) as f64;
                acc += term;
            }
            *o = acc;
        }
        out
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (e - 1.0 - z) / (z * z);
        let p3 = (e - 1.0 - z - z * z * 0.5) / (z * z * z);
        [p1, p2, p3]
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// One Cox-Matthews ETDRK4 step for a diagonal linear part.
fn etdrk4_step(
    lin: &[Complex64; 2],
    n: &impl Fn(&[Complex64; 2]) -> [Complex64; 2],
    u: &[Complex64; 2],
    h: f64,
) -> [Complex64; 2] {
    let mut e = [Complex64::new(0.0, 0.0); 2];
    let mut e2 = e;
    let mut q = e;
    let mut f1 = e;
    let mut f2 = e;
    let mut f3 = e;
    for i in 0..2 {
        let z = lin[i] * h;
        e[i] = z.exp();
        e2[i] = (z * 0.5).exp();
        q[i] = phis(z * 0.5)[0] * (0.5 * h);
        let [p1, p2, p3] = phis(z);
        f1[i] = (p1 - p2 * 3.0 + p3 * 4.0) * h;
        f2[i] = (p2 - p3 * 2.0) * h;
        f3[i] = (p3 * 4.0 - p2) * h;
    }
    let nu = n(u);
    let a: [Complex64; 2] = std::array::from_fn(|i| e2[i] * u[i] + q[i] * nu[i]);
    let na = n(&a);
    let b: [Complex64; 2] = std::array::from_fn(|i| e2[i] * u[i] + q[i] * na[i]);
    let nb = n(&b);
    let c: [Complex64; 2] = std::array::from_fn(|i| e2[i] * a[i] + q[i] * (nb[i] * 2.0 - nu[i]));
    let nc = n(&c);
    std::array::from_fn(|i| {
        e[i] * u[i] + f1[i] * nu[i] + f2[i] * (na[i] + nb[i]) * 2.0 + f3[i] * nc[i]
    })
}
