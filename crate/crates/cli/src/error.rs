// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::process::ExitCode;

use ionpulse_core::assemble::AssembleError;
use ionpulse_core::codebook::CodebookError;
use ionpulse_core::device::DeviceError;
use ionpulse_core::simulate::SimulateError;
use ionpulse_core::Error;

/// Process exit status. The numeric values are a stable contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Failure = 1,
    Usage = 2,
    NotConverged = 3,
    Io = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { exit: Exit::Usage, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { exit: Exit::Io, message: message.into() }
    }

    pub fn code(&self) -> ExitCode {
        ExitCode::from(self.exit as u8)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn classify(err: &Error) -> Exit {
    match err {
        Error::Gate(_) | Error::Canonical(_) | Error::Unit(_) => Exit::Usage,
        Error::Device(DeviceError::Io { .. }) => Exit::Io,
        Error::Device(_) => Exit::Usage,
        Error::Codebook(e) => match e {
            CodebookError::NotConverged { .. } => Exit::NotConverged,
            CodebookError::Io { .. } | CodebookError::Corrupt { .. } => Exit::Io,
            CodebookError::InvalidModel(_) | CodebookError::Canonical(_) => Exit::Usage,
            _ => Exit::Failure,
        },
        Error::Assemble(e) => match e {
            AssembleError::Gate { source, .. } => classify(source),
            AssembleError::Io { .. } => Exit::Io,
            AssembleError::Empty
            | AssembleError::Buffer(_)
            | AssembleError::UnknownMarker(_)
            | AssembleError::MissingQubitFrequency(_)
            | AssembleError::LeadingMarker
            | AssembleError::Parse { .. } => Exit::Usage,
            _ => Exit::Failure,
        },
        Error::Simulate(SimulateError::Noise(_) | SimulateError::Grid(_)) => Exit::Usage,
        _ => Exit::Failure,
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        Self { exit: classify(&err), message: err.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self::io(err.to_string())
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(err: $t) -> Self {
                Error::from(err).into()
            }
        }
    )*};
}

from_core!(
    ionpulse_core::gates::GateError,
    DeviceError,
    CodebookError,
    AssembleError,
    SimulateError,
    ionpulse_core::units::UnitError,
    ionpulse_core::linalg::LinalgError,
    ionpulse_core::synth::SynthError
);
