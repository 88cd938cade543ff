// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! `ionpulse`: synthesize, cache, simulate and export spin-motion gate pulses.
//!
//! Machine-readable results (JSON or CSV) go to stdout or the output
//! directory; human-readable progress goes to stderr. Exit codes: 0 ok,
//! 1 other failure, 2 usage, 3 non-convergence, 4 I/O.

mod circuit;
mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ionpulse_core::units::{parse_angular, parse_complex};
use num_complex::Complex64;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ionpulse", version, about = "Pulse synthesis and schedule export for trapped-ion spin-motion gates")]
pub struct Cli {
    /// Pulse library directory.
    #[arg(long, global = true, env = "PULSE_LIBRARY_ROOT", default_value = "library")]
    pub library: PathBuf,

    /// Bundled device name or path to a calibration TOML file.
    #[arg(long, global = true, default_value = "sydney_gkp_v1")]
    pub device: String,

    /// Seed for the optimizer and for noise sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Only warnings and errors on stderr.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Look up or optimize one gate pulse.
    Synth {
        #[command(flatten)]
        gate: GateArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        device: DeviceArgs,
        #[arg(long, value_enum, default_value_t = StrategyArg::Hybrid)]
        strategy: StrategyArg,
    },
    /// Infidelity against gate duration, as CSV (duration_us,infidelity,key).
    Sweep {
        #[command(flatten)]
        gate: GateArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        device: DeviceArgs,
        /// Comma-separated durations in µs.
        #[arg(long, value_delimiter = ',', required = true)]
        durations: Vec<f64>,
        #[arg(long, value_enum, default_value_t = StrategyArg::Hybrid)]
        strategy: StrategyArg,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Squeezed cat circuit: CS, Hadamard, CD, post-selection on the qubit.
    Cat {
        #[arg(long, value_parser = complex_arg, default_value = "1.7724538509055159")]
        alpha: Complex64,
        #[arg(long, value_parser = complex_arg, default_value = "0.5")]
        zeta: Complex64,
        #[arg(long, default_value_t = 15)]
        n_max: usize,
        #[command(flatten)]
        device: DeviceArgs,
        /// Dephasing rate in Hz; enables the noisy trajectory average.
        #[arg(long)]
        noise_gamma: Option<f64>,
        #[arg(long, default_value_t = 500)]
        traj: usize,
        /// Half-width of the square phase-space grid.
        #[arg(long, default_value_t = 5.0)]
        grid_half_width: f64,
        #[arg(long, default_value_t = 201)]
        grid_points: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Hybrid)]
        strategy: StrategyArg,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Average gate fidelity under motional dephasing.
    Noise {
        #[command(flatten)]
        gate: GateArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        device: DeviceArgs,
        /// Dephasing rate in Hz (default: the device's motional_dephasing_hz).
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 500)]
        traj: usize,
        /// Include every trajectory's fidelity in the output.
        #[arg(long)]
        per_traj: bool,
        #[arg(long, value_enum, default_value_t = StrategyArg::Hybrid)]
        strategy: StrategyArg,
    },
    /// Assemble a circuit file and write backend schedule files.
    Export {
        /// Circuit JSON (format "ionpulse-circuit", version 1).
        circuit: PathBuf,
        /// Backends to emit (default: all).
        #[arg(long = "backend", value_enum)]
        backends: Vec<BackendArg>,
        /// Inter-gate buffer in µs (overrides the circuit file).
        #[arg(long)]
        buffer_us: Option<f64>,
        #[command(flatten)]
        device: DeviceArgs,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Inspect or clean the pulse library.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CacheAction {
    /// One line per valid entry (or a JSON array with --json).
    List {
        #[arg(long)]
        json: bool,
    },
    /// Remove corrupt entries and leftover temporary files.
    Gc {
        #[arg(long)]
        dry_run: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GateKind {
    #[value(name = "CD", alias = "cd")]
    Cd,
    #[value(name = "CR", alias = "cr")]
    Cr,
    #[value(name = "CS", alias = "cs")]
    Cs,
}

#[derive(Debug, Args)]
pub struct GateArgs {
    #[arg(long, value_enum)]
    pub gate: GateKind,
    /// CD displacement, e.g. 0.5+0.5j.
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    pub alpha: Option<Complex64>,
    /// CR rotation angle in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// CS squeezing, e.g. 0.5.
    #[arg(long, value_parser = complex_arg, allow_hyphen_values = true)]
    pub zeta: Option<Complex64>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub num_tslots: Option<usize>,
    /// Gate duration in µs (default: per gate type).
    #[arg(long)]
    pub duration_us: Option<f64>,
    #[arg(long)]
    pub amp_bound: Option<f64>,
    #[arg(long)]
    pub fid_tol: Option<f64>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

/// Calibration overrides. Angular values accept `2pi*10k` or plain rad/s.
#[derive(Debug, Args)]
pub struct DeviceArgs {
    #[arg(long, value_parser = angular_arg, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_parser = angular_arg)]
    pub omega_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Lookup,
    Synthesize,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Artiq,
    Jaqal,
}

fn complex_arg(s: &str) -> Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn angular_arg(s: &str) -> Result<f64, String> {
    parse_angular(s).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Warn,
        (false, 0) => log::LevelFilter::Info,
        (false, 1) => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).format_target(false).init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

impl From<StrategyArg> for ionpulse_core::Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Lookup => Self::Lookup,
            StrategyArg::Synthesize => Self::Synthesize,
            StrategyArg::Hybrid => Self::Hybrid,
        }
    }
}

impl From<BackendArg> for ionpulse_core::ExportBackend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Artiq => Self::Artiq,
            BackendArg::Jaqal => Self::Jaqal,
        }
    }
}

pub(crate) type CliResult<T = ()> = Result<T, CliError>;
