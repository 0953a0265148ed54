// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Fidelity of the protocol under Gaussian gate-parameter noise.
//!
//! The beam-splitter angle and the controlled phase fluctuate as
//! `lambda = pi/4 + dl` and `theta = pi + dt`, with independent zero-mean
//! Gaussian `dl`, `dt` of variances `V_lambda` and `V_theta`. The state is
//! compared right after the controlled phase, where the overlap with the
//! ideal state has the closed form
//!
//! ```text
//! <Phi_ideal|Phi> = sum_k C(N,k) (1 + e^{i k dt}) sin^k(lambda) cos^(N-k)(lambda) / (2 * 2^(N/2)).
//! ```
//!
//! [`analytic_avg_overlap`] averages this expression exactly as a triple
//! sum. [`mc_fidelity`] samples it, recording both the mean complex overlap
//! (comparable with the triple sum) and the mean of its modulus.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};
use crate::special::{double_factorial, eighth_root_of_unity, ComplexSum, LnFactorial};

/// Standard-deviation percentages of the reference sweep.
pub const REFERENCE_PERCENTS: [f64; 6] = [1.0, 2.0, 3.0, 5.0, 15.0, 50.0];

/// Default base seed of Monte Carlo runs.
pub const DEFAULT_SEED: u64 = 42;

/// Variances of the two fluctuating gate parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluctuationSpec {
    /// Variance of the beam-splitter angle (rad^2).
    pub v_lambda: f64,
    /// Variance of the controlled phase (rad^2).
    pub v_theta: f64,
    /// Percentage this spec was built from, if any.
    #[serde(default)]
    pub percent: Option<f64>,
}

impl FluctuationSpec {
    pub fn new(v_lambda: f64, v_theta: f64) -> Result<Self> {
        let spec = FluctuationSpec {
            v_lambda,
            v_theta,
            percent: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `M` percent: `V_theta = (0.01 M pi)^2`, `V_lambda = (0.01 M pi / 4)^2`.
    pub fn from_percent(m: f64) -> Result<Self> {
        if !(m >= 0.0) || !m.is_finite() {
            return invalid_arg(format!("percent must be finite and non-negative, got {m}"));
        }
        let sd = 0.01 * m * PI;
        Ok(FluctuationSpec {
            v_lambda: (sd / 4.0).powi(2),
            v_theta: sd * sd,
            percent: Some(m),
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v_lambda", self.v_lambda), ("v_theta", self.v_theta)] {
            if !(v >= 0.0) || !v.is_finite() {
                return invalid_arg(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

/// One cell of a fidelity comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityResult {
    pub n: usize,
    pub spec: FluctuationSpec,
    /// `|analytic average overlap|`.
    pub analytic: f64,
    pub analytic_complex: Complex64,
    /// Monte Carlo mean of `|overlap|`.
    pub mc_mean: f64,
    /// Standard error of `mc_mean`.
    pub mc_stderr: f64,
    /// Monte Carlo mean of the complex overlap.
    pub mc_mean_complex: Complex64,
    /// Standard error of `mc_mean_complex`, `sqrt(var re + var im) / sqrt(n)`.
    pub mc_stderr_complex: f64,
    pub samples: usize,
    /// Seed of this cell's generator.
    pub seed: u64,
}

/// Moment `E[dz^n]` of a zero-mean Gaussian with variance `v`.
pub fn gaussian_moment(n: u32, v: f64) -> Result<f64> {
    if !(v >= 0.0) {
        return invalid_arg(format!("variance must be non-negative, got {v}"));
    }
    if n % 2 == 1 {
        return Ok(0.0);
    }
    Ok(double_factorial(n as i64 - 1) * v.powi(n as i32 / 2))
}

/// `E[exp(i n dz)] = exp(-n^2 v / 2)`.
pub fn avg_exp(n: i64, v: f64) -> f64 {
    let n = n as f64;
    (-n * n * v / 2.0).exp()
}

/// `E[sin^n(lambda) cos^m(lambda)]` for `lambda = pi/4 + dl`, `Var dl = v`,
/// as the double sum over the binomial expansions of the complex
/// exponentials.
pub fn avg_sin_cos(n: usize, m: usize, v: f64) -> Complex64 {
    let lf = LnFactorial::new(n + m);
    avg_sin_cos_with(&lf, n, m, v)
}

fn avg_sin_cos_with(lf: &LnFactorial, n: usize, m: usize, v: f64) -> Complex64 {
    let mut acc = ComplexSum::default();
    let norm = (n + m) as f64 * LN_2;
    for l in 0..=n {
        for lp in 0..=m {
            let j = (n + m) as i64 - 2 * (l + lp) as i64;
            let mag = (lf.ln_binomial(n, l) + lf.ln_binomial(m, lp) - norm).exp() * avg_exp(j, v);
            // (-1)^l i^(-n) e^(i pi j / 4)
            let phase = eighth_root_of_unity(4 * l as i64 - 2 * n as i64 + j);
            acc.add(phase * mag);
        }
    }
    acc.value()
}

/// Stochastic average of the overlap with the ideal state, by the triple
/// sum over `k`, `l`, `l'`.
///
/// For fixed `k` the phase and the Gaussian factor depend on `l` and `l'`
/// only through `s = l + l'`, up to the sign `(-1)^l`. The inner double sum
/// is therefore grouped into the Krawtchouk coefficients
/// `K_s(k) = sum_l (-1)^l C(k, l) C(N - k, s - l)`, the coefficients of
/// `(1 - x)^k (1 + x)^(N - k)`, which are formed in exact integer
/// arithmetic. The outer binomial comes from a cumulative log-factorial
/// table and the remaining sum is compensated.
pub fn analytic_avg_overlap(n: usize, spec: &FluctuationSpec) -> Result<Complex64> {
    spec.validate()?;
    let lf = LnFactorial::new(n);
    let mut acc = ComplexSum::default();
    let norm = (1.0 + 1.5 * n as f64) * LN_2;
    let lambda_factor: Vec<f64> = (0..=n)
        .map(|s| avg_exp(n as i64 - 2 * s as i64, spec.v_lambda))
        .collect();
    for k in 0..=n {
        let outer = (lf.ln_binomial(n, k) - norm).exp() * (1.0 + avg_exp(k as i64, spec.v_theta));
        for (s, kr) in krawtchouk_row(n, k).into_iter().enumerate() {
            if kr == 0.0 {
                continue;
            }
            // (-1)^l i^(-k) e^(i pi j / 4) with the (-1)^l absorbed in K_s.
            let phase = eighth_root_of_unity(n as i64 - 2 * s as i64 - 2 * k as i64);
            acc.add(phase * (outer * kr * lambda_factor[s]));
        }
    }
    Ok(acc.value())
}

/// Largest `N` whose Krawtchouk coefficients are formed in `i128`; they are
/// bounded by `2^N` in magnitude.
const KRAWTCHOUK_EXACT_MAX: usize = 120;

/// Coefficients of `(1 - x)^k (1 + x)^(n - k)`, exact up to the final
/// conversion for `n <= 120`.
fn krawtchouk_row(n: usize, k: usize) -> Vec<f64> {
    if n <= KRAWTCHOUK_EXACT_MAX {
        let mut c = vec![0i128; n + 1];
        c[0] = 1;
        for deg in 0..n {
            let sign = if deg < n - k { 1 } else { -1 };
            for i in (1..=deg + 1).rev() {
                c[i] += sign * c[i - 1];
            }
        }
        c.into_iter().map(|x| x as f64).collect()
    } else {
        let mut c = vec![0.0f64; n + 1];
        c[0] = 1.0;
        for deg in 0..n {
            let sign = if deg < n - k { 1.0 } else { -1.0 };
            for i in (1..=deg + 1).rev() {
                c[i] += sign * c[i - 1];
            }
        }
        c
    }
}

/// Overlap with the ideal state for one realisation of the fluctuations.
pub fn closed_form_overlap(n: usize, d_lambda: f64, d_theta: f64) -> Complex64 {
    let lambda = PI / 4.0 + d_lambda;
    let (s, c) = lambda.sin_cos();
    let mut binom = 1.0;
    let mut acc = ComplexSum::default();
    for k in 0..=n {
        let w = binom * s.powi(k as i32) * c.powi((n - k) as i32);
        acc.add((Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, k as f64 * d_theta)) * w);
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    acc.value() / (2.0 * 2f64.powf(n as f64 / 2.0))
}

/// Mixes a base seed with a sweep cell into a 64-bit cell seed using
/// SplitMix64 finalisation steps.
pub fn cell_seed(base: u64, n: usize, percent: f64) -> u64 {
    let mut h = splitmix64(base);
    h = splitmix64(h ^ n as u64);
    splitmix64(h ^ percent.to_bits())
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// ChaCha20 generator seeded from a 64-bit seed, repeated over 32 bytes in
/// little-endian order.
pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_mut(8) {
        chunk.copy_from_slice(&seed.to_le_bytes());
    }
    ChaCha20Rng::from_seed(bytes)
}

/// Monte Carlo estimate with `samples` draws from the generator seeded by
/// `seed`. Each draw takes a standard normal for `dl` and then one for
/// `dt`.
pub fn mc_fidelity(
    n: usize,
    spec: &FluctuationSpec,
    samples: usize,
    seed: u64,
) -> Result<FidelityResult> {
    if samples == 0 {
        return invalid_arg("samples must be at least 1");
    }
    let analytic_complex = analytic_avg_overlap(n, spec)?;
    let mut rng = rng_from_seed(seed);
    let (sl, st) = (spec.v_lambda.sqrt(), spec.v_theta.sqrt());
    // Welford accumulators for |z|, Re z and Im z.
    let mut mean = [0.0f64; 3];
    let mut m2 = [0.0f64; 3];
    for i in 0..samples {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let z = closed_form_overlap(n, sl * z1, st * z2);
        let x = [z.norm(), z.re, z.im];
        let count = (i + 1) as f64;
        for q in 0..3 {
            let d = x[q] - mean[q];
            mean[q] += d / count;
            m2[q] += d * (x[q] - mean[q]);
        }
    }
    let var = |q: usize| {
        if samples > 1 {
            m2[q] / (samples - 1) as f64
        } else {
            0.0
        }
    };
    let sqrt_n = (samples as f64).sqrt();
    Ok(FidelityResult {
        n,
        spec: *spec,
        analytic: analytic_complex.norm(),
        analytic_complex,
        mc_mean: mean[0],
        mc_stderr: var(0).sqrt() / sqrt_n,
        mc_mean_complex: Complex64::new(mean[1], mean[2]),
        mc_stderr_complex: (var(1) + var(2)).sqrt() / sqrt_n,
        samples,
        seed,
    })
}

/// Analytic and Monte Carlo values for every `N` in `0..=n_max` and every
/// percentage, in row order `(N ascending, percents as given)`. Each cell
/// draws from its own generator seeded by [`cell_seed`], so the table does
/// not depend on the number of worker threads.
pub fn fidelity_sweep(
    n_max: usize,
    percents: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<FidelityResult>> {
    if samples == 0 {
        return invalid_arg("samples must be at least 1");
    }
    let specs: Vec<FluctuationSpec> = percents
        .iter()
        .map(|&m| FluctuationSpec::from_percent(m))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, FluctuationSpec, f64)> = (0..=n_max)
        .flat_map(|n| specs.iter().zip(percents).map(move |(s, &m)| (n, *s, m)))
        .collect();
    cells
        .par_iter()
        .map(|&(n, spec, m)| mc_fidelity(n, &spec, samples, cell_seed(seed, n, m)))
        .collect()
}
