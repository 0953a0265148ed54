// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! The six batch commands.

use std::io::{self, Write};

use log::info;
use noonforge::dynamics::classical::{
    classical_steady_state, classical_steady_state_with, stability_analysis, SteadyOptions,
};
use noonforge::dynamics::elimination::{cross_kerr_elimination, CrossKerrStudy};
use noonforge::dynamics::master::{evolve_master, EvolutionSpec};
use noonforge::dynamics::projector::effective_hamiltonian_projector;
use noonforge::dynamics::unitary::Propagator;
use noonforge::fluctuations::fidelity_sweep;
use noonforge::fock::{ion_projector, ladder_op, lowering_op, number_op};
use noonforge::hamiltonians::{build_named, free_hamiltonian, h_antinode, NamedInputs};
use noonforge::io::fmt17;
use noonforge::params::format_angular;
use noonforge::protocol::{
    protocol_layout, run_noon_ideal, run_noon_ideal_sampled, run_noon_physical, PhysicalOptions,
    PhysicalState, ProtocolResult, Schedule,
};
use noonforge::{
    ClassicalState, Mode, ModeLayout, Occupation, OperatorMatrix, PhysicalParams, StateVector,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{
    BasisTerm, CollapseConfig, EliminationConfig, EvolveMethod, HamiltonianConfig, LayoutConfig,
    ProtocolMode, RunConfig,
};
use crate::output::Sink;
use crate::Failure;

/// Layout used when the configuration has none.
fn default_layout() -> LayoutConfig {
    LayoutConfig {
        a: Some(4),
        b1: Some(3),
        b2: Some(3),
        ion_levels: 3,
    }
}

fn layout_of(cfg: &RunConfig) -> Result<ModeLayout, Failure> {
    Ok(cfg.layout.clone().unwrap_or_else(default_layout).build()?)
}

fn named_inputs(hc: &HamiltonianConfig, params: &PhysicalParams) -> Result<NamedInputs, Failure> {
    let needs_steady = matches!(hc.name.as_str(), "linearized" | "beamsplitter");
    let steady = match hc.amplitudes {
        Some(a) => ClassicalState::new(
            Complex64::new(a.alpha[0], a.alpha[1]),
            Complex64::new(a.beta[0], a.beta[1]),
        ),
        None if needs_steady => classical_steady_state(params)?,
        None => ClassicalState::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
    };
    Ok(NamedInputs {
        steady,
        cubic: hc.cubic,
        rabi: hc
            .rabi
            .map(Complex64::from)
            .unwrap_or(Complex64::new(0.0, params.omega_rabi)),
    })
}

fn build_hamiltonian(
    hc: &HamiltonianConfig,
    layout: &ModeLayout,
    params: &PhysicalParams,
) -> Result<OperatorMatrix, Failure> {
    let inputs = named_inputs(hc, params)?;
    Ok(build_named(&hc.name, layout, params, &inputs)?)
}

pub fn hamiltonian(cfg: &RunConfig, sink: &Sink) -> Result<(), Failure> {
    let hc = cfg
        .hamiltonian
        .as_ref()
        .ok_or_else(|| Failure::config("missing \"hamiltonian\" block"))?;
    let params = cfg.physical_params()?;
    let layout = layout_of(cfg)?;
    let h = build_hamiltonian(hc, &layout, &params)?;
    let prop = Propagator::new(&h)?;
    let spectrum = prop.spectrum();
    let k = hc.eigenvalues.unwrap_or(spectrum.len()).min(spectrum.len());

    sink.csv("hamiltonian.csv", |w| h.write_csv(w))?;
    sink.csv("spectrum.csv", |w| {
        writeln!(w, "index,eigenvalue")?;
        for (i, e) in spectrum.iter().take(k).enumerate() {
            writeln!(w, "{i},{}", fmt17(*e))?;
        }
        Ok(())
    })?;
    if let Ok(g0) = params.try_g0() {
        println!("g0 = {}", format_angular(g0));
    }
    if let Ok(gck) = params.try_g_ck() {
        println!("g_ck = {}", format_angular(gck));
    }
    println!(
        "{}: dimension {}, {} eigenvalues written",
        hc.name,
        layout.dim(),
        k
    );
    Ok(())
}

fn collapse_operator(layout: &ModeLayout, name: &str) -> Result<OperatorMatrix, Failure> {
    Ok(match name {
        "sigma1" => lowering_op(layout, 1)?,
        "sigma2" => lowering_op(layout, 2)?,
        other => ladder_op(layout, Mode::from_name(other)?)?,
    })
}

fn default_collapse(layout: &ModeLayout, params: &PhysicalParams) -> Vec<CollapseConfig> {
    use crate::config::Angular;
    let mut out = Vec::new();
    for (mode, rate) in [
        (Mode::A, params.gamma_motion),
        (Mode::B1, params.gamma),
        (Mode::B2, params.gamma),
    ] {
        if layout.has_mode(mode) && rate > 0.0 {
            out.push(CollapseConfig {
                operator: mode.name().to_string(),
                rate: Angular(rate),
            });
        }
    }
    if params.gamma_e > 0.0 && layout.excited_level(2).is_ok() {
        out.push(CollapseConfig {
            operator: "sigma2".into(),
            rate: Angular(params.gamma_e),
        });
    }
    out
}

fn initial_state(layout: &ModeLayout, terms: Option<&[BasisTerm]>) -> Result<StateVector, Failure> {
    let ground = [BasisTerm {
        a: 0,
        b1: 0,
        b2: 0,
        level: 0,
        amplitude: [1.0, 0.0],
    }];
    let terms = terms.unwrap_or(&ground);
    if terms.is_empty() {
        return Err(Failure::config(
            "evolve.initial must list at least one term",
        ));
    }
    let states: Vec<(Complex64, StateVector)> = terms
        .iter()
        .map(|t| {
            let occ = Occupation::new(t.a, t.b1, t.b2, t.level);
            StateVector::basis(layout, &occ)
                .map(|s| (Complex64::new(t.amplitude[0], t.amplitude[1]), s))
        })
        .collect::<noonforge::Result<_>>()?;
    let refs: Vec<(Complex64, &StateVector)> = states.iter().map(|(c, s)| (*c, s)).collect();
    Ok(StateVector::superposition(&refs)?.normalized()?)
}

/// Observables recorded along a trajectory.
struct Observables {
    names: Vec<String>,
    ops: Vec<OperatorMatrix>,
}

impl Observables {
    fn new(layout: &ModeLayout) -> Result<Self, Failure> {
        let mut names = Vec::new();
        let mut ops = Vec::new();
        for m in layout.modes() {
            names.push(format!("n_{}", m.name()));
            ops.push(number_op(layout, m)?);
        }
        for k in 0..layout.ion_levels() {
            names.push(format!("p_level_{k}"));
            ops.push(ion_projector(layout, k)?);
        }
        Ok(Observables { names, ops })
    }

    fn row(
        &self,
        w: &mut dyn Write,
        t: f64,
        trace: Complex64,
        purity: f64,
        values: &[Complex64],
    ) -> io::Result<()> {
        let mut line = |name: &str, z: Complex64| {
            writeln!(w, "{},{name},{},{}", fmt17(t), fmt17(z.re), fmt17(z.im))
        };
        line("trace", trace)?;
        for (name, z) in self.names.iter().zip(values) {
            line(name, *z)?;
        }
        line("purity", Complex64::new(purity, 0.0))
    }
}

pub fn evolve(cfg: &RunConfig, sink: &Sink) -> Result<(), Failure> {
    let ec = cfg
        .evolve
        .as_ref()
        .ok_or_else(|| Failure::config("missing \"evolve\" block"))?;
    let params = cfg.physical_params()?;
    let layout = layout_of(cfg)?;
    let h = build_hamiltonian(&ec.hamiltonian, &layout, &params)?;
    let psi0 = initial_state(&layout, ec.initial.as_deref())?;
    let obs = Observables::new(&layout)?;
    let mut rows: Vec<(f64, Complex64, f64, Vec<Complex64>)> = Vec::new();

    match ec.method {
        EvolveMethod::Master => {
            let collapse = ec
                .collapse
                .clone()
                .unwrap_or_else(|| default_collapse(&layout, &params));
            let ops = collapse
                .iter()
                .map(|c| Ok((collapse_operator(&layout, &c.operator)?, c.rate.0)))
                .collect::<Result<Vec<_>, Failure>>()?;
            let mut spec = EvolutionSpec::new(h, ops, ec.duration);
            spec.samples = ec.samples;
            spec.step_control = ec.step_control;
            if let Some(t) = ec.tolerance {
                spec.tolerance = t;
            }
            let run = evolve_master(&spec, &psi0.to_density())?;
            for s in &run.samples {
                let values = obs
                    .ops
                    .iter()
                    .map(|o| s.state.expectation(o))
                    .collect::<noonforge::Result<Vec<_>>>()?;
                rows.push((s.t, s.state.trace(), s.state.purity(), values));
            }
            info!(
                "master run: {} accepted steps, trace drift {:.2e}, min eigenvalue {:.2e}",
                run.stats.accepted, run.max_trace_drift, run.min_eigenvalue
            );
            sink.csv("state.csv", |w| run.final_state.write_csv(w))?;
        }
        EvolveMethod::Unitary => {
            if ec.samples == 0 {
                return Err(Failure::config("evolve.samples must be at least 1"));
            }
            let prop = Propagator::new(&h)?;
            let mut last = psi0.clone();
            for k in 0..=ec.samples {
                let t = ec.duration * k as f64 / ec.samples as f64;
                let psi = prop.evolve(&psi0, t)?;
                let values = obs
                    .ops
                    .iter()
                    .map(|o| psi.expectation(o))
                    .collect::<noonforge::Result<Vec<_>>>()?;
                let norm2 = psi.norm().powi(2);
                rows.push((t, Complex64::new(norm2, 0.0), norm2 * norm2, values));
                last = psi;
            }
            sink.csv("state.csv", |w| last.write_csv(w))?;
        }
    }

    sink.csv("trajectory.csv", |w| {
        writeln!(w, "t_seconds,observable,re,im")?;
        for (t, tr, pur, values) in &rows {
            obs.row(w, *t, *tr, *pur, values)?;
        }
        Ok(())
    })?;
    println!("{} samples written", rows.len());
    Ok(())
}

#[derive(Serialize)]
struct SteadyOut {
    params: PhysicalParams,
    steady: noonforge::dynamics::classical::SteadyReport,
    stability: noonforge::dynamics::classical::StabilityReport,
}

pub fn steady(cfg: &RunConfig, sink: &Sink) -> Result<(), Failure> {
    let params = cfg.physical_params()?;
    let mut opts = SteadyOptions::default();
    if let Some(sc) = cfg.steady {
        opts.damping = sc.damping.unwrap_or(opts.damping);
        opts.max_iterations = sc.max_iterations.unwrap_or(opts.max_iterations);
        opts.tolerance = sc.tolerance.unwrap_or(opts.tolerance);
    }
    let report = classical_steady_state_with(&params, &opts)?;
    let stability = stability_analysis(&params, &report.state)?;
    println!(
        "alpha = {}, beta = {}, residual = {:.3e}, stable = {}",
        report.state.alpha, report.state.beta, report.residual, stability.stable
    );
    sink.json(
        "steady.json",
        &SteadyOut {
            params,
            steady: report,
            stability,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct BranchOut {
    outcome: &'static str,
    probability: f64,
    fidelity: f64,
}

impl From<&ProtocolResult> for BranchOut {
    fn from(r: &ProtocolResult) -> Self {
        BranchOut {
            outcome: r.outcome.label(),
            probability: r.probability,
            fidelity: r.fidelity,
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
enum ProtocolOut {
    Ideal {
        n: usize,
        dimension: usize,
        /// The reported branch.
        selected: BranchOut,
        /// Measurement seed, when the branch was sampled.
        seed: Option<u64>,
        branches: Vec<BranchOut>,
    },
    Physical {
        n: usize,
        dimension: usize,
        dissipative: bool,
        schedule: Schedule,
        total_time: f64,
        fidelity_to_ideal: f64,
        probability_ground: f64,
        fidelity_ground: f64,
    },
}

pub fn protocol(cfg: &RunConfig, sink: &Sink, seed: u64) -> Result<(), Failure> {
    let pc = cfg
        .protocol
        .as_ref()
        .ok_or_else(|| Failure::config("missing \"protocol\" block"))?;
    let n = pc.n;
    let layout = match &cfg.layout {
        Some(l) => l.build()?,
        None => protocol_layout(n)?,
    };
    let out = match pc.mode {
        ProtocolMode::Ideal => {
            let branches = run_noon_ideal(n, &layout)?;
            let (selected, used_seed) = match pc.outcome {
                Some(o) => (branches.branch(o).clone(), None),
                None => (run_noon_ideal_sampled(n, &layout, seed)?, Some(seed)),
            };
            sink.csv("state.csv", |w| selected.post_state.write_csv(w))?;
            ProtocolOut::Ideal {
                n,
                dimension: layout.dim(),
                selected: (&selected).into(),
                seed: used_seed,
                branches: vec![(&branches.ground).into(), (&branches.excited).into()],
            }
        }
        ProtocolMode::Physical => {
            let params = cfg.physical_params()?;
            let mut schedule = Schedule::preset(&params)?;
            if let Some(s) = pc.schedule {
                if let Some(b) = s.beta {
                    schedule.beta = b.into();
                }
                if let Some(r) = s.rabi {
                    schedule.rabi = r.into();
                }
                let nominal = Schedule::nominal(&params, schedule.beta, schedule.rabi)?;
                schedule.t_b = s.t_b.unwrap_or(nominal.t_b);
                schedule.t_c = s.t_c.unwrap_or(nominal.t_c);
                schedule.t_j = s.t_j.unwrap_or(nominal.t_j);
                schedule.t_r = s.t_r.unwrap_or(nominal.t_r);
                schedule.beam_splitter = s.beam_splitter;
            }
            let opts = PhysicalOptions {
                dissipative: pc.dissipative,
                ..Default::default()
            };
            let run = run_noon_physical(n, &layout, &params, &schedule, &opts)?;
            match &run.final_state {
                PhysicalState::Pure(psi) => sink.csv("state.csv", |w| psi.write_csv(w))?,
                PhysicalState::Mixed(rho) => sink.csv("state.csv", |w| rho.write_csv(w))?,
            };
            ProtocolOut::Physical {
                n,
                dimension: layout.dim(),
                dissipative: pc.dissipative,
                schedule,
                total_time: run.total_time,
                fidelity_to_ideal: run.fidelity_to_ideal,
                probability_ground: run.probability_ground,
                fidelity_ground: run.fidelity_ground,
            }
        }
    };
    match &out {
        ProtocolOut::Ideal { selected, .. } => println!(
            "N = {n}: outcome {} with probability {:.12}, fidelity {:.12}",
            selected.outcome, selected.probability, selected.fidelity
        ),
        ProtocolOut::Physical {
            fidelity_to_ideal,
            total_time,
            ..
        } => println!(
            "N = {n}: fidelity to the ideal output {fidelity_to_ideal:.12} after {total_time:.6e} s"
        ),
    }
    sink.json("protocol.json", &out)?;
    Ok(())
}

pub fn fidelity_sweep_cmd(cfg: &RunConfig, sink: &Sink, seed: u64) -> Result<(), Failure> {
    let sc = cfg.fidelity_sweep.clone().unwrap_or_default();
    let cells = fidelity_sweep(sc.n_max, &sc.percents, sc.samples, seed)?;
    sink.csv("sweep.csv", |w| {
        writeln!(
            w,
            "N,percent,v_lambda,v_theta,analytic_abs,analytic_re,analytic_im,mc_mean_abs,mc_stderr,mc_mean_complex_re,mc_mean_complex_im,mc_stderr_complex,samples,seed"
        )?;
        for c in &cells {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.n,
                fmt17(c.spec.percent.unwrap_or(f64::NAN)),
                fmt17(c.spec.v_lambda),
                fmt17(c.spec.v_theta),
                fmt17(c.analytic),
                fmt17(c.analytic_complex.re),
                fmt17(c.analytic_complex.im),
                fmt17(c.mc_mean),
                fmt17(c.mc_stderr),
                fmt17(c.mc_mean_complex.re),
                fmt17(c.mc_mean_complex.im),
                fmt17(c.mc_stderr_complex),
                c.samples,
                c.seed
            )?;
        }
        Ok(())
    })?;
    println!("{} cells written", cells.len());
    Ok(())
}

fn study_for(ec: &EliminationConfig, ratio: f64) -> CrossKerrStudy {
    let delta2 = ratio * ec.unit;
    CrossKerrStudy {
        omega: ec.omega,
        delta2,
        nu: ec.nu_over_delta2 * delta2,
        eta: ec.eta,
        cutoff_a: ec.cutoff_a,
        samples: ec.samples,
        calibration: ec.calibration,
        duration: ec.duration,
    }
}

/// Anti-Hermitian residual of the projected anti-node Hamiltonian on the
/// ion ground state, with `H0 = nu a†a + Delta2 b2†b2` and `t = 1000 / Delta2`.
fn projector_residual(study: &CrossKerrStudy) -> Result<f64, Failure> {
    let layout = study.layout()?;
    let params = study.params();
    let h = h_antinode(&layout, &params)?;
    let h0 = free_hamiltonian(&layout, &[(Mode::A, study.nu), (Mode::B2, study.delta2)])?;
    let h1 = (&h - &h0).into_hermitian()?;
    let p = ion_projector(&layout, 0)?;
    let res = effective_hamiltonian_projector(&h0, &h1, &p, 1e3 / study.delta2.abs())?;
    Ok(res.residual)
}

pub fn verify_elimination(cfg: &RunConfig, sink: &Sink) -> Result<(), Failure> {
    let ec = cfg.verify_elimination.clone().unwrap_or_default();
    if ec.ratios.is_empty() {
        return Err(Failure::config("verify_elimination.ratios is empty"));
    }
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &ratio in &ec.ratios {
        let study = study_for(&ec, ratio);
        let report = cross_kerr_elimination(&study)?;
        let residual = projector_residual(&study)?;
        println!(
            "Delta2/Omega = {ratio}: max infidelity {:.3e}, projector residual {:.3e}",
            report.max_infidelity, residual
        );
        for (t, f) in report.times.iter().zip(&report.infidelity) {
            rows.push((ratio, *t, *f));
        }
        summary.push((ratio, report.max_infidelity, residual));
    }
    sink.csv("elimination.csv", |w| {
        writeln!(w, "delta2_over_omega,t_seconds,infidelity")?;
        for (r, t, f) in &rows {
            writeln!(w, "{},{},{}", fmt17(*r), fmt17(*t), fmt17(*f))?;
        }
        Ok(())
    })?;
    sink.csv("elimination_summary.csv", |w| {
        writeln!(w, "delta2_over_omega,max_infidelity,projector_residual")?;
        for (r, f, res) in &summary {
            writeln!(w, "{},{},{}", fmt17(*r), fmt17(*f), fmt17(*res))?;
        }
        Ok(())
    })?;
    Ok(())
}
