// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Physical parameters of the ion-cavity model.
//!
//! All frequencies and rates are angular (rad/s) with `hbar = 1`. Derived
//! couplings are methods, never stored fields, so they cannot go stale
//! when a parameter is edited.
//!
//! Two conventions deserve a note.
//!
//! * The optomechanical coupling is `g0 = eta * Omega^2 / Delta0`. It is the
//!   coefficient of `x b1† b1` obtained by expanding
//!   `-g(x)^2 / Delta0` with `g(x) = Omega sin(eta x + Phi)` to first order
//!   in `eta` at `Phi = pi/4`. With the feasibility numbers it evaluates to
//!   `2 pi x 5 Hz`.
//! * The cross-Kerr coupling is `g_ck = 2 eta^2 Omega^2 / Delta2`. At the
//!   feasibility point this equals `10 gamma`; the combination
//!   `eta^2 Omega^2 / |Delta2|` is half of it.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the built-in preset.
pub const PAPER_FEASIBILITY: &str = "paper-feasibility";

/// Target mean intracavity photon number of the preset pump.
pub const PRESET_PHOTON_NUMBER: f64 = 1000.0;

/// Symbols of the model Hamiltonians and master equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Trap frequency `nu`.
    pub nu: f64,
    /// Detuning of transition 1 from cavity 1.
    pub delta0: f64,
    /// Detuning of cavity 1 from its pump.
    pub delta1: f64,
    /// Detuning of transition 2 from cavity 2.
    pub delta2: f64,
    /// Vacuum Rabi coupling `Omega`.
    pub omega_rabi: f64,
    /// Lamb-Dicke parameter.
    pub eta: f64,
    /// Standing-wave phase `Phi`.
    pub phi: f64,
    /// Complex pump amplitude `E` of cavity 1.
    pub pump: Complex64,
    /// Cavity field decay rate `gamma`.
    pub gamma: f64,
    /// Motional decay rate `Gamma`.
    pub gamma_motion: f64,
    /// Spontaneous emission rate of the internal transition.
    pub gamma_e: f64,
    /// Keep the constant cavity shift `-Omega^2/(2 Delta0) b1† b1` in the
    /// optomechanical Hamiltonian.
    #[serde(default)]
    pub retain_stark_shift: bool,
}

impl PhysicalParams {
    /// The feasibility parameter set.
    ///
    /// `gamma = 2pi x 10 Hz`, `Omega = 2pi x 50 kHz`, `Delta2 = 10 Omega`,
    /// `nu = 10 Delta2 = 2pi x 5 MHz`, `Delta0 = 10 nu`, `Delta1 = nu`,
    /// `eta = 0.1`, `Phi = pi/4`. The motional decay rate is not quoted; it
    /// is set to `2pi x 1 Hz`, well below `gamma`. Internal decay is off.
    /// The pump is chosen so that the exact classical steady state has
    /// `beta = i sqrt(1000)`.
    pub fn paper_feasibility() -> Self {
        let omega = TAU * 50e3;
        let delta2 = 10.0 * omega;
        let nu = 10.0 * delta2;
        let mut p = PhysicalParams {
            nu,
            delta0: 10.0 * nu,
            delta1: nu,
            delta2,
            omega_rabi: omega,
            eta: 0.1,
            phi: PI / 4.0,
            pump: Complex64::new(0.0, 0.0),
            gamma: TAU * 10.0,
            gamma_motion: TAU * 1.0,
            gamma_e: 0.0,
            retain_stark_shift: false,
        };
        p.pump = p.pump_for_cavity_amplitude(Complex64::new(0.0, PRESET_PHOTON_NUMBER.sqrt()));
        p
    }

    /// Looks up a preset by name.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            PAPER_FEASIBILITY => Ok(Self::paper_feasibility()),
            other => Err(Error::InvalidArgument(format!("unknown preset '{other}'"))),
        }
    }

    /// Optomechanical coupling `eta Omega^2 / Delta0`.
    pub fn g0(&self) -> f64 {
        self.eta * self.omega_rabi * self.omega_rabi / self.delta0
    }

    /// [`PhysicalParams::g0`], rejecting `Delta0 = 0`.
    pub fn try_g0(&self) -> Result<f64> {
        if self.delta0 == 0.0 {
            return Err(Error::InvalidParams(
                "g0 is undefined for delta0 = 0".into(),
            ));
        }
        Ok(self.g0())
    }

    /// Cross-Kerr coupling `2 eta^2 Omega^2 / Delta2`.
    pub fn g_ck(&self) -> f64 {
        2.0 * self.eta * self.eta * self.omega_rabi * self.omega_rabi / self.delta2
    }

    /// [`PhysicalParams::g_ck`], rejecting `Delta2 = 0`.
    pub fn try_g_ck(&self) -> Result<f64> {
        if self.delta2 == 0.0 {
            return Err(Error::InvalidParams(
                "g_ck is undefined for delta2 = 0".into(),
            ));
        }
        Ok(self.g_ck())
    }

    /// Constant cavity shift `Omega^2 / (2 Delta0)` dropped from the
    /// optomechanical Hamiltonian by default.
    pub fn stark_shift(&self) -> f64 {
        self.omega_rabi * self.omega_rabi / (2.0 * self.delta0)
    }

    /// Pump amplitude for which `(alpha, beta)` with the given `beta` is an
    /// exact fixed point of the classical equations.
    pub fn pump_for_cavity_amplitude(&self, beta: Complex64) -> Complex64 {
        let g0 = self.g0();
        let alpha = g0 * beta.norm_sqr() / Complex64::new(self.nu, -self.gamma_motion);
        beta * Complex64::new(self.delta1 - 2.0 * g0 * alpha.re, -self.gamma)
    }

    /// Checks the invariants: `nu > 0`, `eta >= 0`, rates `>= 0`, all finite.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.nu,
            self.delta0,
            self.delta1,
            self.delta2,
            self.omega_rabi,
            self.eta,
            self.phi,
            self.pump.re,
            self.pump.im,
            self.gamma,
            self.gamma_motion,
            self.gamma_e,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite".into()));
        }
        if !(self.nu > 0.0) {
            return Err(Error::InvalidParams(format!(
                "nu must be positive, got {}",
                self.nu
            )));
        }
        if self.eta < 0.0 {
            return Err(Error::InvalidParams(format!(
                "eta must be non-negative, got {}",
                self.eta
            )));
        }
        for (name, r) in [
            ("gamma", self.gamma),
            ("gamma_motion", self.gamma_motion),
            ("gamma_e", self.gamma_e),
        ] {
            if r < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be non-negative, got {r}"
                )));
            }
        }
        Ok(())
    }
}

/// Parses an angular frequency written either as a plain number (rad/s)
/// or as `2pi*<Hz>`, e.g. `"2pi*5e6"`.
pub fn parse_angular(s: &str) -> Result<f64> {
    let t = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse '{s}' as an angular frequency"));
    let value = if let Some(rest) = t.strip_prefix("2pi*").or_else(|| t.strip_prefix("2*pi*")) {
        TAU * rest.trim().parse::<f64>().map_err(|_| bad())?
    } else {
        t.parse::<f64>().map_err(|_| bad())?
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Formats an angular frequency as `2pi*<Hz> Hz`.
pub fn format_angular(x: f64) -> String {
    format!("2pi*{} Hz", x / TAU)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_couplings() {
        let p = PhysicalParams::paper_feasibility();
        assert!((p.g0() / (TAU * 5.0) - 1.0).abs() < 1e-12);
        assert!((p.g_ck() / (10.0 * p.gamma) - 1.0).abs() < 1e-12);
        assert!((p.nu / (TAU * 5e6) - 1.0).abs() < 1e-15);
        p.validate().unwrap();
    }

    #[test]
    fn angular_syntax() {
        assert_eq!(parse_angular("2pi*5e6").unwrap(), TAU * 5e6);
        assert_eq!(parse_angular(" 12.5 ").unwrap(), 12.5);
        assert!(parse_angular("2pi*").is_err());
        assert!(parse_angular("five").is_err());
    }

    #[test]
    fn zero_detunings_rejected() {
        let mut p = PhysicalParams::paper_feasibility();
        p.delta0 = 0.0;
        p.delta2 = 0.0;
        assert!(p.try_g0().is_err());
        assert!(p.try_g_ck().is_err());
    }
}
