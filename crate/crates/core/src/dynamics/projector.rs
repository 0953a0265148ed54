// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Second-order effective Hamiltonian by the projection-operator method.
//!
//! For `H = H0 + H1` and a projector `P` onto the retained sector,
//!
//! ```text
//! H_eff(t) = P H0 P + (1/i) int_0^t dtau  P H1 H1~(tau) P,
//! H1~(tau) = exp(-i H0 tau) H1 exp(i H0 tau).
//! ```
//!
//! Before evaluation the split is redefined so that `P H1 P = 0`: the
//! block-diagonal part of `H1` is moved into `H0`.
//!
//! In the eigenbasis of `H0` the integrand is elementwise, with matrix
//! element `(j, k)` of `H1~` oscillating at `w_jk = E_j - E_k`. The
//! integral therefore reduces to one scalar integral per distinct
//! frequency, which is computed by composite Gauss-Legendre quadrature with
//! the node count doubled until it settles.
//!
//! Three flavours of the result are reported.
//!
//! * `raw`: the integral over `[0, t]` as written. Each non-secular pair
//!   contributes `-(1 - exp(-i w t)) / w`, whose oscillating part makes the
//!   result non-Hermitian and prevents convergence in `t`.
//! * `secular`: the same integral with the Abel weight `exp(-tau/t)` over
//!   `[0, 36 t]`. Each pair contributes `-1 / (w - i/t)` up to `exp(-36)`,
//!   which tends to the time-averaged second-order shift as `t` grows.
//! * `hermitized`: the Hermitian part of `secular`.
//!
//! `residual` is the Frobenius norm of the anti-Hermitian part of
//! `secular`; it decays like `1 / (t * gap)`.

use std::collections::BTreeMap;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid_arg, Error, Result};
use crate::fock::{Hermiticity, OperatorMatrix};
use crate::linalg::{
    anti_hermitian_part, frobenius, hermitian_eigen, hermitian_part, inf_norm, matmul, CMatrix, C0,
    CI,
};
use crate::quadrature::composite_nodes;

/// Length of the Abel-weighted interval in units of `t`.
pub const ABEL_SPAN: f64 = 36.0;

/// Gauss-Legendre order of each panel.
const PANEL_ORDER: usize = 16;

/// Tolerance of the check `P^2 = P`.
pub const PROJECTOR_TOL: f64 = 1e-12;

/// Controls of [`effective_hamiltonian_projector_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorOptions {
    /// Nodes of the first quadrature pass; rounded up to whole panels.
    pub initial_nodes: usize,
    /// Relative change between passes at which a frequency is converged.
    pub tolerance: f64,
    /// Node count beyond which the procedure gives up.
    pub max_nodes: usize,
}

impl Default for ProjectorOptions {
    fn default() -> Self {
        ProjectorOptions {
            initial_nodes: 64,
            tolerance: 1e-10,
            max_nodes: 1 << 24,
        }
    }
}

/// Outputs of the projection procedure, all on the layout of the inputs.
#[derive(Debug, Clone)]
pub struct ProjectorResult {
    pub raw: OperatorMatrix,
    pub secular: OperatorMatrix,
    pub hermitized: OperatorMatrix,
    /// `||AntiHerm(secular)||_F`.
    pub residual: f64,
    /// `||AntiHerm(raw)||_F`.
    pub raw_residual: f64,
    /// `||P H0 Q||_F` of the redefined split, expected to vanish.
    pub coupling_leak: f64,
    /// Largest node count any frequency needed.
    pub max_nodes_used: usize,
}

/// [`effective_hamiltonian_projector_with`] with default options.
pub fn effective_hamiltonian_projector(
    h0: &OperatorMatrix,
    h1: &OperatorMatrix,
    p: &OperatorMatrix,
    t: f64,
) -> Result<ProjectorResult> {
    effective_hamiltonian_projector_with(h0, h1, p, t, &ProjectorOptions::default())
}

/// Evaluates the effective Hamiltonian on the range of `p` at time `t`.
pub fn effective_hamiltonian_projector_with(
    h0: &OperatorMatrix,
    h1: &OperatorMatrix,
    p: &OperatorMatrix,
    t: f64,
    opts: &ProjectorOptions,
) -> Result<ProjectorResult> {
    if h0.layout() != h1.layout() || h0.layout() != p.layout() {
        return invalid_arg("h0, h1 and p must share a layout");
    }
    if !h0.is_hermitian() || !h1.is_hermitian() {
        return invalid_arg("h0 and h1 must be Hermitian-flagged");
    }
    if !(t > 0.0) || !t.is_finite() {
        return invalid_arg(format!("t must be positive and finite, got {t}"));
    }
    if opts.initial_nodes == 0 || opts.max_nodes < opts.initial_nodes || !(opts.tolerance > 0.0) {
        return invalid_arg("invalid quadrature options");
    }
    let pm = p.matrix();
    let p2 = matmul(pm, pm);
    if inf_norm(&(&p2 - pm)) > PROJECTOR_TOL || inf_norm(&(pm - pm.adjoint())) > PROJECTOR_TOL {
        return invalid_arg("p is not an orthogonal projector");
    }
    let d = pm.nrows();
    let qm = CMatrix::identity(d, d) - pm;

    // Redefine the split so that P H1 P = Q H1 Q = 0.
    let h1m = h1.matrix();
    let diag_part = matmul(&matmul(pm, h1m), pm) + matmul(&matmul(&qm, h1m), &qm);
    let h0m = hermitian_part(&(h0.matrix() + &diag_part));
    let h1m = hermitian_part(&(h1m - &diag_part));

    let coupling_leak = frobenius(&matmul(&matmul(pm, &h0m), &qm));
    if coupling_leak > PROJECTOR_TOL * frobenius(&h0m).max(1.0) {
        warn!("effective_hamiltonian_projector: P H0 Q is not zero (norm {coupling_leak:.3e})");
    }

    let (energies, v) = hermitian_eigen(&h0m);
    let h1e = matmul(&matmul(&v.adjoint(), &h1m), &v);

    // Distinct frequencies of the elements of H1 that can contribute.
    let scale = energies
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()))
        .max(f64::MIN_POSITIVE);
    let quantum = 1e-13 * scale;
    let h1_floor = 1e-15 * inf_norm(&h1e).max(f64::MIN_POSITIVE);
    let mut freq_index: BTreeMap<i64, usize> = BTreeMap::new();
    let mut freqs: Vec<f64> = Vec::new();
    let mut pair_freq = vec![usize::MAX; d * d];
    for j in 0..d {
        for k in 0..d {
            if h1e[(j, k)].norm() <= h1_floor {
                continue;
            }
            let w = energies[j] - energies[k];
            let key = (w / quantum).round() as i64;
            let idx = *freq_index.entry(key).or_insert_with(|| {
                freqs.push(w);
                freqs.len() - 1
            });
            pair_freq[j + d * k] = idx;
        }
    }

    let raw_s = integrate_all(&freqs, t, None, opts)?;
    let sec_s = integrate_all(&freqs, ABEL_SPAN * t, Some(t), opts)?;
    let max_nodes_used = raw_s.1.max(sec_s.1);

    let second_order = |s: &[Complex64]| -> CMatrix {
        let mut weighted = CMatrix::from_element(d, d, C0);
        for j in 0..d {
            for k in 0..d {
                let idx = pair_freq[j + d * k];
                if idx != usize::MAX {
                    weighted[(j, k)] = h1e[(j, k)] * s[idx];
                }
            }
        }
        let eig = matmul(&h1e, &weighted);
        let lab = matmul(&matmul(&v, &eig), &v.adjoint());
        matmul(&matmul(pm, &lab), pm)
    };
    let ph0p = matmul(&matmul(pm, &h0m), pm);
    let raw = &ph0p + second_order(&raw_s.0);
    let secular = &ph0p + second_order(&sec_s.0);
    let residual = frobenius(&anti_hermitian_part(&secular));
    let raw_residual = frobenius(&anti_hermitian_part(&raw));
    let layout = h0.layout().clone();
    Ok(ProjectorResult {
        hermitized: OperatorMatrix::from_parts(
            layout.clone(),
            hermitian_part(&secular),
            Hermiticity::Hermitian,
        ),
        raw: OperatorMatrix::from_parts(layout.clone(), raw, Hermiticity::General),
        secular: OperatorMatrix::from_parts(layout, secular, Hermiticity::General),
        residual,
        raw_residual,
        coupling_leak,
        max_nodes_used,
    })
}

/// `(1/i) int_0^span exp(-i w tau) [exp(-tau/decay)] dtau` for every
/// frequency, each refined independently. Returns the values and the
/// largest node count used.
fn integrate_all(
    freqs: &[f64],
    span: f64,
    decay: Option<f64>,
    opts: &ProjectorOptions,
) -> Result<(Vec<Complex64>, usize)> {
    let results: Vec<Result<(Complex64, usize)>> = freqs
        .par_iter()
        .map(|&w| integrate_one(w, span, decay, opts))
        .collect();
    let mut values = Vec::with_capacity(freqs.len());
    let mut most = 0;
    for r in results {
        let (v, n) = r?;
        values.push(v);
        most = most.max(n);
    }
    Ok((values, most))
}

fn integrate_one(
    w: f64,
    span: f64,
    decay: Option<f64>,
    opts: &ProjectorOptions,
) -> Result<(Complex64, usize)> {
    let rule = |panels: usize| -> Complex64 {
        let (x, wt) = composite_nodes(0.0, span, panels, PANEL_ORDER);
        let mut acc = C0;
        for (tau, weight) in x.iter().zip(&wt) {
            let damp = decay.map_or(1.0, |dt| (-tau / dt).exp());
            acc += Complex64::from_polar(weight * damp, -w * tau);
        }
        acc / CI
    };
    let mut panels = opts.initial_nodes.div_ceil(PANEL_ORDER).max(1);
    let mut prev = rule(panels);
    loop {
        panels *= 2;
        let nodes = panels * PANEL_ORDER;
        if nodes > opts.max_nodes {
            return Err(Error::IntegrationFailure(format!(
                "projector quadrature did not converge for frequency {w:.6e} within {} nodes",
                opts.max_nodes
            )));
        }
        let next = rule(panels);
        if (next - prev).norm() <= opts.tolerance * next.norm() {
            return Ok((next, nodes));
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_integrals_match_closed_forms() {
        let opts = ProjectorOptions::default();
        let t = 3.0;
        for w in [0.0, 0.7, -5.0, 40.0] {
            let (raw, _) = integrate_one(w, t, None, &opts).unwrap();
            let expect = if w == 0.0 {
                -CI * t
            } else {
                -(Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -w * t)) / w
            };
            assert!((raw - expect).norm() < 1e-11 * expect.norm(), "raw w={w}");
            let (sec, _) = integrate_one(w, ABEL_SPAN * t, Some(t), &opts).unwrap();
            let z = Complex64::new(1.0 / t, w);
            let expect = (Complex64::new(1.0, 0.0) - (-z * ABEL_SPAN * t).exp()) / z / CI;
            assert!(
                (sec - expect).norm() < 1e-11 * expect.norm(),
                "secular w={w}"
            );
        }
    }
}
