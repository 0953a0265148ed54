// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! The JSON run configuration.
//!
//! One file describes one run. Every object rejects unknown keys. Angular
//! frequencies and rates may be given as numbers (rad/s) or as strings of
//! the form `"2pi*<Hz>"`; complex values are `[re, im]` pairs.

use std::fmt;

use noonforge::dynamics::elimination::PhaseCalibration;
use noonforge::dynamics::ode::{StepControl, Tolerance};
use noonforge::params::{parse_angular, PAPER_FEASIBILITY};
use noonforge::protocol::{BeamSplitterModel, IonOutcome};
use noonforge::{Mode, ModeLayout, PhysicalParams};
use num_complex::Complex64;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A value in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angular(pub f64);

impl Serialize for Angular {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angular {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Angular;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a string like \"2pi*5e6\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Angular, E> {
                Ok(Angular(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Angular, E> {
                Ok(Angular(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Angular, E> {
                Ok(Angular(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Angular, E> {
                parse_angular(v).map(Angular).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// `[re, im]`, each part an [`Angular`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexIn(pub Angular, pub Angular);

impl From<ComplexIn> for Complex64 {
    fn from(c: ComplexIn) -> Self {
        Complex64::new(c.0 .0, c.1 .0)
    }
}

/// Top-level configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Named parameter set; `params` entries override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<LayoutConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady: Option<SteadyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity_sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_elimination: Option<EliminationConfig>,
}

/// Physical parameters, each optional when a preset supplies it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Angular>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<Angular>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<Angular>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<Angular>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_rabi: Option<Angular>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump: Option<ComplexIn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Angular>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_motion: Option<Angular>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_e: Option<Angular>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retain_stark_shift: Option<bool>,
}

/// Fock cutoffs of the modes present and the number of ion levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<usize>,
    #[serde(default = "two")]
    pub ion_levels: usize,
}

fn two() -> usize {
    2
}

impl LayoutConfig {
    pub fn build(&self) -> noonforge::Result<ModeLayout> {
        let modes: Vec<(Mode, usize)> =
            [(Mode::A, self.a), (Mode::B1, self.b1), (Mode::B2, self.b2)]
                .into_iter()
                .filter_map(|(m, c)| c.map(|c| (m, c)))
                .collect();
        ModeLayout::new(&modes, self.ion_levels)
    }
}

/// Selects a named Hamiltonian and its extra inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub name: String,
    /// Classical amplitudes for `linearized` and `beamsplitter`; the
    /// classical steady state of `params` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<AmplitudesConfig>,
    #[serde(default)]
    pub cubic: bool,
    /// Drive of `rabi_drive`; `i Omega` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi: Option<ComplexIn>,
    /// Number of lowest eigenvalues to write; all when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudesConfig {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

/// One term `amplitude |a, b1, b2, level>` of an initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisTerm {
    #[serde(default)]
    pub a: usize,
    #[serde(default)]
    pub b1: usize,
    #[serde(default)]
    pub b2: usize,
    #[serde(default)]
    pub level: usize,
    #[serde(default = "unit_amplitude")]
    pub amplitude: [f64; 2],
}

fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolveMethod {
    #[default]
    Master,
    Unitary,
}

/// A collapse channel: operator name (`a`, `b1`, `b2`, `sigma1`, `sigma2`)
/// and rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseConfig {
    pub operator: String,
    pub rate: Angular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub method: EvolveMethod,
    /// Collapse channels; derived from the decay rates of `params` when
    /// omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collapse: Option<Vec<CollapseConfig>>,
    /// Initial state as a superposition of basis states (normalised); the
    /// vacuum with the ion in `g` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<BasisTerm>>,
    /// Duration in seconds.
    pub duration: f64,
    #[serde(default = "ten")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Tolerance>,
    #[serde(default)]
    pub step_control: StepControl,
}

fn ten() -> usize {
    10
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolMode {
    #[default]
    Ideal,
    Physical,
}

/// Stage durations of a physical run. Missing entries take their nominal
/// values at the preset cavity amplitude.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<ComplexIn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi: Option<ComplexIn>,
    #[serde(default)]
    pub beam_splitter: BeamSplitterModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub n: usize,
    #[serde(default)]
    pub mode: ProtocolMode,
    /// Branch to report in ideal mode; sampled from the seed when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<IonOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    /// Physical mode only: evolve the master equation with the decay rates
    /// of `params`.
    #[serde(default)]
    pub dissipative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "forty")]
    pub n_max: usize,
    #[serde(default = "reference_percents")]
    pub percents: Vec<f64>,
    #[serde(default = "ten_thousand")]
    pub samples: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_max: forty(),
            percents: reference_percents(),
            samples: ten_thousand(),
        }
    }
}

fn forty() -> usize {
    40
}

fn ten_thousand() -> usize {
    10_000
}

fn reference_percents() -> Vec<f64> {
    noonforge::fluctuations::REFERENCE_PERCENTS.to_vec()
}

/// The anti-node versus cross-Kerr ladder. `ratios` lists `Delta2` in
/// units of `unit`, which equals the default `omega`, so the entries read
/// as `Delta2 / Omega` unless the two are set apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EliminationConfig {
    #[serde(default = "ladder_ratios")]
    pub ratios: Vec<f64>,
    #[serde(default = "ten_f")]
    pub nu_over_delta2: f64,
    #[serde(default = "tenth")]
    pub eta: f64,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "one")]
    pub unit: f64,
    #[serde(default = "eight")]
    pub cutoff_a: usize,
    #[serde(default = "sixteen")]
    pub samples: usize,
    #[serde(default = "local_modes")]
    pub calibration: PhaseCalibration,
    /// Fixed duration in seconds; the pi cross-phase time of each ladder
    /// point when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
}

impl Default for EliminationConfig {
    fn default() -> Self {
        EliminationConfig {
            ratios: ladder_ratios(),
            nu_over_delta2: ten_f(),
            eta: tenth(),
            omega: one(),
            unit: one(),
            cutoff_a: eight(),
            samples: sixteen(),
            calibration: local_modes(),
            duration: None,
        }
    }
}

fn ladder_ratios() -> Vec<f64> {
    vec![5.0, 10.0, 20.0, 40.0]
}

fn ten_f() -> f64 {
    10.0
}

fn tenth() -> f64 {
    0.1
}

fn one() -> f64 {
    1.0
}

fn eight() -> usize {
    8
}

fn sixteen() -> usize {
    16
}

fn local_modes() -> PhaseCalibration {
    PhaseCalibration::LocalModes
}

/// A configuration problem, reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parses a configuration document. Errors carry the line and column.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError(format!("config parse error: {e}")))
}

impl RunConfig {
    /// Physical parameters from the preset and the explicit entries.
    pub fn physical_params(&self) -> Result<PhysicalParams, ConfigError> {
        let base = match self.preset.as_deref() {
            Some(name) => {
                Some(PhysicalParams::preset(name).map_err(|e| ConfigError(format!("{e}")))?)
            }
            None => None,
        };
        let given = self.params.clone().unwrap_or_default();
        let mut missing = Vec::new();
        macro_rules! pick {
            ($field:ident, $conv:expr) => {
                match (given.$field, base) {
                    (Some(v), _) => $conv(v),
                    (None, Some(b)) => b.$field,
                    (None, None) => {
                        missing.push(stringify!($field));
                        Default::default()
                    }
                }
            };
        }
        let ang = |a: Angular| a.0;
        let id = |x: f64| x;
        let p = PhysicalParams {
            nu: pick!(nu, ang),
            delta0: pick!(delta0, ang),
            delta1: pick!(delta1, ang),
            delta2: pick!(delta2, ang),
            omega_rabi: pick!(omega_rabi, ang),
            eta: pick!(eta, id),
            phi: pick!(phi, id),
            pump: pick!(pump, Complex64::from),
            gamma: pick!(gamma, ang),
            gamma_motion: pick!(gamma_motion, ang),
            gamma_e: pick!(gamma_e, ang),
            retain_stark_shift: given
                .retain_stark_shift
                .or(base.map(|b| b.retain_stark_shift))
                .unwrap_or(false),
        };
        if !missing.is_empty() {
            return Err(ConfigError(format!(
                "params: missing {} (give them or set \"preset\": \"{PAPER_FEASIBILITY}\")",
                missing.join(", ")
            )));
        }
        Ok(p)
    }
}
