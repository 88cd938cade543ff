// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulse synthesis and schedule assembly for spin-motion gates on trapped
//! ions.
//!
//! The offline half optimizes piecewise-constant pulses for controlled
//! displacement, rotation and squeezing gates and stores them in a
//! content-addressed [`codebook::Codebook`]. The online half stitches cached
//! pulses into [`assemble::Schedule`]s and writes them out for control
//! stacks. [`simulate`] covers closed and dephased evolution plus Wigner
//! functions.

pub mod assemble;
pub mod codebook;
pub mod device;
pub mod gates;
pub mod linalg;
pub mod simulate;
pub mod synth;
pub mod units;

use thiserror::Error;

pub use assemble::{laser_frequency, CircuitExporter, CompiledGate, ExportBackend, MatchMode, Schedule, ScheduleEntry};
pub use codebook::{request_hash, Codebook, CodebookError, ModelSpec, PulseSpec, Strategy};
pub use device::{bundled_device, load_device, resolve_eta, DeviceSpec};
pub use gates::{GatePlugin, GateRegistry, GateSpec, ParamValue};
pub use linalg::{ComplexMatrix, ComplexVector, FockSpace};
pub use synth::{grape_optimize, propagate, ControlProblem, GrapeOutcome, Waveforms};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Gate(#[from] gates::GateError),
    #[error(transparent)]
    Device(#[from] device::DeviceError),
    #[error(transparent)]
    Canonical(#[from] codebook::CanonicalError),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
    #[error(transparent)]
    Synth(#[from] synth::SynthError),
    #[error(transparent)]
    Simulate(#[from] simulate::SimulateError),
    #[error(transparent)]
    Assemble(#[from] assemble::AssembleError),
    #[error(transparent)]
    Unit(#[from] units::UnitError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
