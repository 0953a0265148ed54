// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! The N00N-state protocol, as ideal gates and as timed physical evolution.
//!
//! Starting from `|N>_1 |0>_a (|0>_2 + |1>_2) |g> / sqrt 2` the pipeline
//! applies
//!
//! 1. `B(pi/4)`, a balanced beam splitter between cavity 1 and the motion,
//! 2. `C(pi)`, a cross phase controlled by cavity 2,
//! 3. `B(pi/4)` again,
//! 4. `J`, a swap of the cavity-2 excitation into the ion,
//! 5. `R`, a `pi/4` rotation of the ion,
//!
//! and measures the ion. With cavity 2 empty the two beam splitters swap
//! `|N,0>` into `|0,N>`; with one photon in cavity 2 the controlled phase
//! undoes the swap. The ion outcome `g` leaves
//! `(|0>_1|N>_a + i|N>_1|0>_a)/sqrt 2` and `e` the relative minus sign.
//!
//! The beam splitter is `B(lambda) = exp[lambda (a† b1 - a b1†)]`, which
//! maps `b1† -> cos(lambda) b1† + sin(lambda) a†`. This is the orientation
//! in which the binomial expansion
//! `B(lambda)|N>_1|0>_a = sum_k sqrt(C(N,k)) sin^k cos^(N-k) |N-k>_1 |k>_a`
//! holds with positive coefficients and for which the outcome labels above
//! hold for every `N`. The opposite orientation multiplies the `|0,N>`
//! component by `(-1)^N`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::master::{evolve_master, EvolutionSpec};
use crate::dynamics::ode::Tolerance;
use crate::dynamics::unitary::{evolve_unitary, local_exp_anti_hermitian};
use crate::dynamics::ClassicalState;
use crate::error::{invalid_arg, Error, Result};
use crate::fluctuations::rng_from_seed;
use crate::fock::{
    annihilation_local, embed, ion_projector, kron_le, ladder_op, lowering_local, lowering_op,
    mixed_pure_fidelity, DensityOperator, Hermiticity, Mode, ModeLayout, Occupation,
    OperatorMatrix, StateVector, Subsystem,
};
use crate::hamiltonians::{
    free_hamiltonian, h_beamsplitter_interaction, h_cross_kerr_interaction, h_jc_resonant,
    h_linearized, h_rabi_drive,
};
use crate::linalg::{matvec, CMatrix, CVector};
use crate::params::PhysicalParams;

const A: Subsystem = Subsystem::Mode(Mode::A);
const B1: Subsystem = Subsystem::Mode(Mode::B1);
const B2: Subsystem = Subsystem::Mode(Mode::B2);
const ION: Subsystem = Subsystem::Ion;

fn unitary(layout: &ModeLayout, subs: &[Subsystem], local: &CMatrix) -> Result<OperatorMatrix> {
    Ok(OperatorMatrix::from_parts(
        layout.clone(),
        embed(layout, subs, local)?,
        Hermiticity::General,
    ))
}

fn diagonal_phase(layout: &ModeLayout, phase: impl Fn(&Occupation) -> f64) -> OperatorMatrix {
    let d = layout.dim();
    let diag = CVector::from_iterator(
        d,
        (0..d).map(|i| Complex64::from_polar(1.0, phase(&layout.occupation(i)))),
    );
    OperatorMatrix::from_parts(
        layout.clone(),
        CMatrix::from_diagonal(&diag),
        Hermiticity::General,
    )
}

/// Beam splitter `exp[lambda (a† b1 - a b1†)]` on modes `a`, `b1`.
pub fn gate_beamsplitter(layout: &ModeLayout, lambda: f64) -> Result<OperatorMatrix> {
    if !lambda.is_finite() {
        return invalid_arg("lambda must be finite");
    }
    let (da, db) = (layout.require(Mode::A)?, layout.require(Mode::B1)?);
    let a = annihilation_local(da);
    let b = annihilation_local(db);
    let gen =
        (kron_le(&[&a.adjoint(), &b]) - kron_le(&[&a, &b.adjoint()])) * Complex64::new(lambda, 0.0);
    unitary(layout, &[A, B1], &local_exp_anti_hermitian(&gen))
}

/// Controlled phase `exp(i theta n_a n_b2)`.
pub fn gate_controlled_phase(layout: &ModeLayout, theta: f64) -> Result<OperatorMatrix> {
    if !theta.is_finite() {
        return invalid_arg("theta must be finite");
    }
    layout.require(Mode::A)?;
    layout.require(Mode::B2)?;
    Ok(diagonal_phase(layout, |o| theta * (o.a * o.b2) as f64))
}

/// Excitation swap `J = exp[-i pi (b2† s2 + b2 s2†) / 2]` between cavity 2
/// and the second ion transition.
pub fn gate_swap_j(layout: &ModeLayout) -> Result<OperatorMatrix> {
    let db = layout.require(Mode::B2)?;
    let e = layout.excited_level(2)?;
    let b = annihilation_local(db);
    let s = lowering_local(layout.ion_levels(), e);
    let h = kron_le(&[&b.adjoint(), &s]) + kron_le(&[&b, &s.adjoint()]);
    let gen = h * Complex64::new(0.0, -FRAC_PI_2);
    unitary(layout, &[B2, ION], &local_exp_anti_hermitian(&gen))
}

/// Ion rotation `R = exp[pi (s2† - s2) / 4]`, taking `|g>` to
/// `(|g> + |e>)/sqrt 2`.
pub fn gate_r(layout: &ModeLayout) -> Result<OperatorMatrix> {
    let e = layout.excited_level(2)?;
    let s = lowering_local(layout.ion_levels(), e);
    let gen = (s.adjoint() - &s) * Complex64::new(FRAC_PI_4, 0.0);
    unitary(layout, &[ION], &local_exp_anti_hermitian(&gen))
}

/// Phase `exp(i theta n_a)` on the motion.
pub fn phase_p(layout: &ModeLayout, theta: f64) -> Result<OperatorMatrix> {
    if !theta.is_finite() {
        return invalid_arg("theta must be finite");
    }
    layout.require(Mode::A)?;
    Ok(diagonal_phase(layout, |o| theta * o.a as f64))
}

/// A single protocol gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    B(f64),
    C(f64),
    J,
    R,
    P(f64),
}

impl Gate {
    pub fn matrix(&self, layout: &ModeLayout) -> Result<OperatorMatrix> {
        match *self {
            Gate::B(l) => gate_beamsplitter(layout, l),
            Gate::C(t) => gate_controlled_phase(layout, t),
            Gate::J => gate_swap_j(layout),
            Gate::R => gate_r(layout),
            Gate::P(t) => phase_p(layout, t),
        }
    }
}

/// Ordered gates on a fixed layout, with their matrices built up front.
#[derive(Debug, Clone)]
pub struct GateSequence {
    layout: ModeLayout,
    gates: Vec<(Gate, OperatorMatrix)>,
}

impl GateSequence {
    pub fn new(layout: &ModeLayout, gates: &[Gate]) -> Result<Self> {
        let gates = gates
            .iter()
            .map(|g| Ok((*g, g.matrix(layout)?)))
            .collect::<Result<_>>()?;
        Ok(GateSequence {
            layout: layout.clone(),
            gates,
        })
    }

    /// The full protocol `B(pi/4), C(pi), B(pi/4), J, R` (in order of
    /// application).
    pub fn noon(layout: &ModeLayout) -> Result<Self> {
        Self::new(
            layout,
            &[
                Gate::B(FRAC_PI_4),
                Gate::C(PI),
                Gate::B(FRAC_PI_4),
                Gate::J,
                Gate::R,
            ],
        )
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn gates(&self) -> Vec<Gate> {
        self.gates.iter().map(|g| g.0).collect()
    }

    /// Applies the gates in order.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.layout() != &self.layout {
            return invalid_arg("state layout differs from the gate sequence layout");
        }
        let mut amps = psi.amplitudes().clone();
        for (_, u) in &self.gates {
            amps = matvec(u.matrix(), &amps);
        }
        StateVector::new(self.layout.clone(), amps)
    }
}

/// Default layout for an `N`-quantum run: cutoff `N + 2` on `a` and `b1`,
/// 2 on `b2`, two ion levels.
pub fn protocol_layout(n: usize) -> Result<ModeLayout> {
    ModeLayout::new(&[(Mode::A, n + 2), (Mode::B1, n + 2), (Mode::B2, 2)], 2)
}

fn check_protocol_layout(layout: &ModeLayout, n: usize) -> Result<()> {
    for m in [Mode::A, Mode::B1] {
        let c = layout.require(m)?;
        if c < n + 1 {
            return invalid_arg(format!(
                "cutoff {c} of mode {m} cannot hold {n} quanta (need at least {})",
                n + 1
            ));
        }
    }
    if layout.require(Mode::B2)? < 2 {
        return invalid_arg("mode b2 needs a cutoff of at least 2");
    }
    if layout.ion_levels() < 2 {
        return invalid_arg("the protocol needs at least two ion levels");
    }
    Ok(())
}

/// `|N>_1 |0>_a (|0>_2 + |1>_2) |g> / sqrt 2`.
pub fn initial_state(layout: &ModeLayout, n: usize) -> Result<StateVector> {
    check_protocol_layout(layout, n)?;
    let s0 = StateVector::basis(layout, &Occupation::new(0, n, 0, 0))?;
    let s1 = StateVector::basis(layout, &Occupation::new(0, n, 1, 0))?;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    StateVector::superposition(&[(h, &s0), (h, &s1)])
}

/// Result of measuring the ion at the end of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IonOutcome {
    /// Ground state `g`.
    Ground,
    /// Upper level of the second transition.
    Excited,
}

impl IonOutcome {
    pub fn level(self, layout: &ModeLayout) -> Result<usize> {
        match self {
            IonOutcome::Ground => Ok(0),
            IonOutcome::Excited => layout.excited_level(2),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IonOutcome::Ground => "g",
            IonOutcome::Excited => "e",
        }
    }
}

/// `(|0>_1|N>_a + s i |N>_1|0>_a)/sqrt 2 (x) |0>_2 (x) |outcome>`, with
/// `s = +1` for `g` and `-1` for `e`. For `N = 0` this is the vacuum.
pub fn noon_target(layout: &ModeLayout, n: usize, outcome: IonOutcome) -> Result<StateVector> {
    check_protocol_layout(layout, n)?;
    let level = outcome.level(layout)?;
    let sign = match outcome {
        IonOutcome::Ground => 1.0,
        IonOutcome::Excited => -1.0,
    };
    let x = StateVector::basis(layout, &Occupation::new(n, 0, 0, level))?;
    let y = StateVector::basis(layout, &Occupation::new(0, n, 0, level))?;
    StateVector::superposition(&[
        (Complex64::new(1.0, 0.0), &x),
        (Complex64::new(0.0, sign), &y),
    ])?
    .normalized()
}

/// Projects the ion onto `outcome`. Returns the normalised post-measurement
/// state and the Born probability.
pub fn project_ion(state: &StateVector, outcome: IonOutcome) -> Result<(StateVector, f64)> {
    let layout = state.layout();
    let proj = ion_projector(layout, outcome.level(layout)?)?;
    let psi = state.normalized()?;
    let branch = proj.apply(&psi)?;
    let p = branch.norm().powi(2);
    if p <= 1e-300 {
        return Err(Error::InvalidState(format!(
            "ion outcome {} has zero probability",
            outcome.label()
        )));
    }
    Ok((branch.normalized()?, p))
}

/// Born-rule measurement of the ion, sampled with a generator seeded by
/// `seed`. Population outside `g` and the second excited level is an
/// error, since it is not a protocol outcome.
pub fn measure_ion(state: &StateVector, seed: u64) -> Result<(IonOutcome, StateVector, f64)> {
    let layout = state.layout();
    if layout.ion_levels() < 2 {
        return invalid_arg("measurement needs at least two ion levels");
    }
    let psi = state.normalized()?;
    let mut probs = vec![0.0; layout.ion_levels()];
    for (i, z) in psi.amplitudes().iter().enumerate() {
        probs[layout.occupation(i).level] += z.norm_sqr();
    }
    let u: f64 = rng_from_seed(seed).random();
    let mut acc = 0.0;
    let mut level = probs.len() - 1;
    for (l, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            level = l;
            break;
        }
    }
    let outcome = if level == 0 {
        IonOutcome::Ground
    } else if level == layout.excited_level(2)? {
        IonOutcome::Excited
    } else {
        return Err(Error::InvalidState(format!(
            "measured ion level {level}, which is not a protocol outcome"
        )));
    };
    let (post, p) = project_ion(&psi, outcome)?;
    Ok((outcome, post, p))
}

/// One measurement branch of a protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub n: usize,
    pub pre_measurement: StateVector,
    pub outcome: IonOutcome,
    pub probability: f64,
    pub post_state: StateVector,
    pub target: StateVector,
    pub fidelity: f64,
    /// Seed of the sampled measurement, if the outcome was sampled.
    pub seed: Option<u64>,
}

/// Both measurement branches of one run.
#[derive(Debug, Clone)]
pub struct NoonBranches {
    pub ground: ProtocolResult,
    pub excited: ProtocolResult,
}

impl NoonBranches {
    pub fn branch(&self, outcome: IonOutcome) -> &ProtocolResult {
        match outcome {
            IonOutcome::Ground => &self.ground,
            IonOutcome::Excited => &self.excited,
        }
    }
}

fn branch_result(
    n: usize,
    pre: &StateVector,
    outcome: IonOutcome,
    seed: Option<u64>,
) -> Result<ProtocolResult> {
    let (post, probability) = project_ion(pre, outcome)?;
    let target = noon_target(pre.layout(), n, outcome)?;
    let fidelity = target.overlap(&post)?.norm();
    Ok(ProtocolResult {
        n,
        pre_measurement: pre.clone(),
        outcome,
        probability,
        post_state: post,
        target,
        fidelity,
        seed,
    })
}

/// State right before the measurement in the ideal gate pipeline.
pub fn ideal_pre_measurement(n: usize, layout: &ModeLayout) -> Result<StateVector> {
    let psi0 = initial_state(layout, n)?;
    GateSequence::noon(layout)?.apply(&psi0)
}

/// Ideal gate pipeline with both measurement branches extracted.
pub fn run_noon_ideal(n: usize, layout: &ModeLayout) -> Result<NoonBranches> {
    let pre = ideal_pre_measurement(n, layout)?;
    Ok(NoonBranches {
        ground: branch_result(n, &pre, IonOutcome::Ground, None)?,
        excited: branch_result(n, &pre, IonOutcome::Excited, None)?,
    })
}

/// Ideal gate pipeline with a sampled measurement outcome.
pub fn run_noon_ideal_sampled(n: usize, layout: &ModeLayout, seed: u64) -> Result<ProtocolResult> {
    let pre = ideal_pre_measurement(n, layout)?;
    let (outcome, _, _) = measure_ion(&pre, seed)?;
    branch_result(n, &pre, outcome, Some(seed))
}

/// `(C(theta) B(lambda) |N>_1 |0>_a (|0>_2 + |1>_2) |g>) / sqrt 2`, the
/// state compared in the fluctuation analysis.
pub fn fluctuating_state(
    n: usize,
    layout: &ModeLayout,
    lambda: f64,
    theta: f64,
) -> Result<StateVector> {
    let psi0 = initial_state(layout, n)?;
    GateSequence::new(layout, &[Gate::B(lambda), Gate::C(theta)])?.apply(&psi0)
}

/// Hamiltonian used for the beam-splitter stage of a physical run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamSplitterModel {
    /// Interaction-picture exchange term after the rotating-wave
    /// approximation.
    #[default]
    Rwa,
    /// Full linearised Hamiltonian in the lab frame, followed by removal
    /// of the free rotation.
    Linearized,
}

/// Stage durations and drive settings of a physical run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    /// Duration of each beam-splitter stage.
    pub t_b: f64,
    pub t_c: f64,
    pub t_j: f64,
    pub t_r: f64,
    /// Cavity amplitude `beta` setting the beam-splitter coupling.
    pub beta: Complex64,
    /// Rabi drive amplitude `Lambda` of the rotation stage.
    pub rabi: Complex64,
    #[serde(default)]
    pub beam_splitter: BeamSplitterModel,
}

impl Schedule {
    /// Nominal durations: `pi / (4 g0 |beta|)`, `pi / g_ck`, `pi / (2 Omega)`
    /// and `pi / (4 |Lambda|)`. `beta` must be `i |beta|` and `Lambda` must be
    /// `i |Lambda|` for the stages to reproduce `B` and `R` exactly.
    pub fn nominal(params: &PhysicalParams, beta: Complex64, rabi: Complex64) -> Result<Self> {
        let g0 = params.try_g0()?;
        let gck = params.try_g_ck()?;
        if g0 * beta.norm() == 0.0 || gck == 0.0 || params.omega_rabi == 0.0 || rabi.norm() == 0.0 {
            return invalid_arg(
                "nominal schedule needs non-zero g0 |beta|, g_ck, Omega and Lambda",
            );
        }
        Ok(Schedule {
            t_b: FRAC_PI_4 / (g0 * beta.norm()).abs(),
            t_c: PI / gck.abs(),
            t_j: FRAC_PI_2 / params.omega_rabi.abs(),
            t_r: FRAC_PI_4 / rabi.norm(),
            beta,
            rabi,
            beam_splitter: BeamSplitterModel::Rwa,
        })
    }

    /// Nominal schedule at the preset cavity amplitude `i sqrt(1000)` and
    /// a drive `Lambda = i Omega`.
    pub fn preset(params: &PhysicalParams) -> Result<Self> {
        let beta = Complex64::new(0.0, crate::params::PRESET_PHOTON_NUMBER.sqrt());
        Self::nominal(params, beta, Complex64::new(0.0, params.omega_rabi))
    }

    pub fn total_time(&self) -> f64 {
        2.0 * self.t_b + self.t_c + self.t_j + self.t_r
    }

    fn validate(&self) -> Result<()> {
        for (name, t) in [
            ("t_b", self.t_b),
            ("t_c", self.t_c),
            ("t_j", self.t_j),
            ("t_r", self.t_r),
        ] {
            if !(t >= 0.0) || !t.is_finite() {
                return invalid_arg(format!("{name} must be finite and non-negative, got {t}"));
            }
        }
        Ok(())
    }
}

/// Options of a physical run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhysicalOptions {
    /// Evolve the master equation with the decay channels of `params`
    /// instead of the Schrödinger equation.
    pub dissipative: bool,
    pub tolerance: Tolerance,
}

/// Final state of a physical run.
#[derive(Debug, Clone)]
pub enum PhysicalState {
    Pure(StateVector),
    Mixed(DensityOperator),
}

/// Output of [`run_noon_physical`].
#[derive(Debug, Clone)]
pub struct PhysicalRun {
    pub n: usize,
    pub final_state: PhysicalState,
    /// Output of the ideal gate pipeline on the same input.
    pub ideal: StateVector,
    /// Fidelity of the final state with the ideal output.
    pub fidelity_to_ideal: f64,
    /// Probability of the outcome `g`.
    pub probability_ground: f64,
    /// Fidelity of the `g` branch with its N00N target.
    pub fidelity_ground: f64,
    pub total_time: f64,
}

/// Collapse operators of a dissipative run: `b1` and `b2` at `gamma`, `a`
/// at `Gamma`, and the second ion transition at `Gamma_e` when non-zero.
pub fn protocol_collapse_ops(
    layout: &ModeLayout,
    params: &PhysicalParams,
) -> Result<Vec<(OperatorMatrix, f64)>> {
    let mut ops = vec![
        (ladder_op(layout, Mode::B1)?, params.gamma),
        (ladder_op(layout, Mode::B2)?, params.gamma),
        (ladder_op(layout, Mode::A)?, params.gamma_motion),
    ];
    if params.gamma_e > 0.0 {
        ops.push((lowering_op(layout, 2)?, params.gamma_e));
    }
    Ok(ops.into_iter().filter(|(_, r)| *r > 0.0).collect())
}

/// Runs the protocol by timed evolution under the stage Hamiltonians.
///
/// * `B`: `-g0 (beta a b1† + beta* a† b1)` in the interaction picture, or
///   the linearised Hamiltonian with `(alpha, beta)` in the lab frame
///   followed by `exp[+i (nu n_a + D1 n_b1) t]`,
///   `D1 = Delta1 - 2 g0 Re alpha`, where `alpha` is the classical motional
///   amplitude belonging to `beta`.
/// * `C`: `-g_ck n_a n_b2`.
/// * `J`: `Omega (s2† b2 + s2 b2†)`.
/// * `R`: `Lambda s2† + Lambda* s2`.
///
/// Detunings switch instantaneously between stages. Dissipative runs use
/// the interaction-picture beam splitter.
pub fn run_noon_physical(
    n: usize,
    layout: &ModeLayout,
    params: &PhysicalParams,
    schedule: &Schedule,
    opts: &PhysicalOptions,
) -> Result<PhysicalRun> {
    params.validate()?;
    schedule.validate()?;
    let psi0 = initial_state(layout, n)?;
    let ideal = ideal_pre_measurement(n, layout)?;
    let h_c = h_cross_kerr_interaction(layout, params)?;
    let h_j = h_jc_resonant(layout, params)?;
    let h_r = h_rabi_drive(layout, schedule.rabi)?;
    let h_b = h_beamsplitter_interaction(layout, params, schedule.beta)?;
    let stages = [
        (&h_b, schedule.t_b),
        (&h_c, schedule.t_c),
        (&h_b, schedule.t_b),
        (&h_j, schedule.t_j),
        (&h_r, schedule.t_r),
    ];

    let final_state = if opts.dissipative {
        let jumps = protocol_collapse_ops(layout, params)?;
        let mut rho = psi0.to_density();
        for (h, t) in stages {
            let mut spec = EvolutionSpec::new(h.clone(), jumps.clone(), t);
            spec.tolerance = opts.tolerance;
            rho = evolve_master(&spec, &rho)?.final_state;
        }
        PhysicalState::Mixed(rho)
    } else {
        let mut psi = psi0;
        for (k, (h, t)) in stages.into_iter().enumerate() {
            let is_b = k == 0 || k == 2;
            psi = if is_b && schedule.beam_splitter == BeamSplitterModel::Linearized {
                linearized_beam_splitter(layout, params, schedule.beta, &psi, t)?
            } else {
                evolve_unitary(h, &psi, t)?
            };
        }
        PhysicalState::Pure(psi)
    };

    let (fidelity_to_ideal, probability_ground, fidelity_ground) = match &final_state {
        PhysicalState::Pure(psi) => {
            let f = ideal.overlap(psi)?.norm();
            let (p, fg) = match project_ion(psi, IonOutcome::Ground) {
                Ok((post, p)) => (
                    p,
                    noon_target(layout, n, IonOutcome::Ground)?
                        .overlap(&post)?
                        .norm(),
                ),
                Err(Error::InvalidState(_)) => (0.0, 0.0),
                Err(e) => return Err(e),
            };
            (f, p, fg)
        }
        PhysicalState::Mixed(rho) => {
            let f = mixed_pure_fidelity(rho, &ideal)?;
            let proj = ion_projector(layout, 0)?;
            let p = rho.expectation(&proj)?.re.max(0.0);
            let fg = if p > 1e-300 {
                let m = crate::linalg::matmul(
                    &crate::linalg::matmul(proj.matrix(), rho.matrix()),
                    proj.matrix(),
                )
                .map(|z| z / p);
                let post = DensityOperator::from_matrix_unchecked(layout.clone(), m);
                mixed_pure_fidelity(&post, &noon_target(layout, n, IonOutcome::Ground)?)?
            } else {
                0.0
            };
            (f, p, fg)
        }
    };
    Ok(PhysicalRun {
        n,
        final_state,
        ideal,
        fidelity_to_ideal,
        probability_ground,
        fidelity_ground,
        total_time: schedule.total_time(),
    })
}

fn linearized_beam_splitter(
    layout: &ModeLayout,
    params: &PhysicalParams,
    beta: Complex64,
    psi: &StateVector,
    t: f64,
) -> Result<StateVector> {
    let g0 = params.try_g0()?;
    let alpha = g0 * beta.norm_sqr() / Complex64::new(params.nu, -params.gamma_motion);
    let steady = ClassicalState { alpha, beta };
    let h = h_linearized(layout, params, &steady, false)?;
    let d1 = params.delta1 - 2.0 * g0 * alpha.re;
    let evolved = evolve_unitary(&h, psi, t)?;
    let free = free_hamiltonian(layout, &[(Mode::A, params.nu), (Mode::B1, d1)])?;
    evolve_unitary(&free, &evolved, -t)
}
