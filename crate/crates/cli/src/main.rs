// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! `noonforge`: batch front end of the simulation library.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 configuration error,
//! 3 failed precondition, 4 integration or convergence failure.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, ProtocolConfig, RunConfig};
use output::{Provenance, Sink};

#[derive(Parser, Debug)]
#[command(
    name = "noonforge",
    version,
    about = "Hybrid motion-photon N00N state simulations"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Random seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, env = "NOONFORGE_THREADS")]
    threads: Option<usize>,
    /// Parameter preset; overrides the configuration.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a named Hamiltonian and its spectrum.
    Hamiltonian {
        /// Hamiltonian name; overrides the configuration.
        #[arg(long)]
        name: Option<String>,
    },
    /// Evolve a state and record observables.
    Evolve,
    /// Classical steady state and its stability.
    Steady,
    /// Run the N00N protocol.
    Protocol {
        /// Photon number; overrides the configuration.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Analytic and Monte Carlo fidelities under gate-parameter noise.
    FidelitySweep {
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Compare the anti-node model with its cross-Kerr reduction.
    VerifyElimination,
}

/// Anything that ends a run early, tagged with its exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Library(noonforge::Error),
    Io(std::io::Error),
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }

    fn exit_code(&self) -> u8 {
        use noonforge::Error as E;
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Library(
                E::InvalidArgument(_) | E::OutOfRange(_) | E::InvalidState(_) | E::InvalidParams(_),
            ) => 3,
            Failure::Library(E::IntegrationFailure(_) | E::NoConvergence { .. }) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Library(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<noonforge::Error> for Failure {
    fn from(e: noonforge::Error) -> Self {
        Failure::Library(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

/// Reads the configuration and folds the command-line overrides into it,
/// so the provenance hash covers every input.
fn effective_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            config::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(p) = &cli.preset {
        cfg.preset = Some(p.clone());
    }
    cfg.seed = Some(
        cli.seed
            .or(cfg.seed)
            .unwrap_or(noonforge::fluctuations::DEFAULT_SEED),
    );
    match &cli.command {
        Command::Hamiltonian { name: Some(name) } => match &mut cfg.hamiltonian {
            Some(h) => h.name = name.clone(),
            None => {
                cfg.hamiltonian = Some(config::HamiltonianConfig {
                    name: name.clone(),
                    amplitudes: None,
                    cubic: false,
                    rabi: None,
                    eigenvalues: None,
                })
            }
        },
        Command::Protocol { n: Some(n) } => match &mut cfg.protocol {
            Some(p) => p.n = *n,
            None => {
                cfg.protocol = Some(ProtocolConfig {
                    n: *n,
                    mode: Default::default(),
                    outcome: None,
                    schedule: None,
                    dissipative: false,
                })
            }
        },
        Command::FidelitySweep { n_max, samples } => {
            let s = cfg.fidelity_sweep.get_or_insert_with(Default::default);
            if let Some(n) = n_max {
                s.n_max = *n;
            }
            if let Some(k) = samples {
                s.samples = *k;
            }
        }
        _ => {}
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(std::io::Error::other(e)))?;
    }
    let cfg = effective_config(cli)?;
    let seed = cfg.seed.expect("seed is always filled in");
    let sink = Sink::new(&cli.out, Provenance::new(&cfg, seed))?;
    log::info!("{}", sink.provenance().header());
    match &cli.command {
        Command::Hamiltonian { .. } => commands::hamiltonian(&cfg, &sink),
        Command::Evolve => commands::evolve(&cfg, &sink),
        Command::Steady => commands::steady(&cfg, &sink),
        Command::Protocol { .. } => commands::protocol(&cfg, &sink, seed),
        Command::FidelitySweep { .. } => commands::fidelity_sweep_cmd(&cfg, &sink, seed),
        Command::VerifyElimination => commands::verify_elimination(&cfg, &sink),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("noonforge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
