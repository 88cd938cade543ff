// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use crate::codebook::{Codebook, CodebookError, ModelSpec, Strategy};
use crate::device::DeviceSpec;
use crate::gates::GateSpec;
use crate::Error;

/// One point of a duration sweep. Failed points keep their error text and,
/// for non-converged runs, the best fidelity reached.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub duration_us: f64,
    pub infidelity: Option<f64>,
    pub key: Option<String>,
    pub converged: bool,
    pub error: Option<String>,
}

/// Synthesizes `gate` once per duration through the codebook. A failing point
/// is recorded and the sweep moves on.
pub fn duration_sweep(
    codebook: &Codebook,
    gate: &GateSpec,
    device: &DeviceSpec,
    model: &ModelSpec,
    durations_us: &[f64],
    strategy: Strategy,
) -> Vec<SweepPoint> {
    durations_us
        .iter()
        .map(|&duration_us| {
            let model = ModelSpec { duration_us, ..model.clone() };
            match codebook.compile_pulse(gate, device, &model, strategy) {
                Ok(p) => SweepPoint {
                    duration_us,
                    infidelity: Some(1.0 - p.achieved_fidelity),
                    key: Some(p.key),
                    converged: p.converged,
                    error: None,
                },
                Err(Error::Codebook(CodebookError::NotConverged { fidelity, pulse, .. })) => SweepPoint {
                    duration_us,
                    infidelity: Some(1.0 - fidelity),
                    key: Some(pulse.key.clone()),
                    converged: false,
                    error: None,
                },
                Err(e) => SweepPoint {
                    duration_us,
                    infidelity: None,
                    key: None,
                    converged: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
