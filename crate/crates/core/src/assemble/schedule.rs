// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::export::{write_schedule, ExportBackend};
use super::{AssembleError, CompiledGate};
use crate::codebook::{Codebook, ModelSpec};
use crate::device::DeviceSpec;
use crate::gates::{GateRegistry, GateSpec};
use crate::linalg::{hadamard, identity, kron, sigma_x, sigma_z, ComplexMatrix, FockSpace};
use crate::synth::propagate;
use crate::Error;

pub const DEFAULT_BUFFER_US: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    /// Dimensionless samples; the physical Rabi rate is `sample · drive_scale`.
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleEntry {
    Pulse {
        gate: GateSpec,
        model: ModelSpec,
        key: String,
        t_start_us: f64,
        duration_us: f64,
        omega_l_rad_s: f64,
        channels: Vec<Channel>,
    },
    /// Ideal, instantaneous single-qubit gate.
    Marker { name: String, qubit: usize, t_us: f64 },
}

impl ScheduleEntry {
    pub fn start_us(&self) -> f64 {
        match self {
            ScheduleEntry::Pulse { t_start_us, .. } => *t_start_us,
            ScheduleEntry::Marker { t_us, .. } => *t_us,
        }
    }

    pub fn duration_us(&self) -> f64 {
        match self {
            ScheduleEntry::Pulse { duration_us, .. } => *duration_us,
            ScheduleEntry::Marker { .. } => 0.0,
        }
    }
}

/// A timed sequence of pulses and ideal-gate markers on one device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub name: String,
    pub device: DeviceSpec,
    /// Full-scale Rabi rate (rad/s) that dimensionless samples refer to.
    pub drive_scale_rad_s: f64,
    pub buffer_us: f64,
    pub entries: Vec<ScheduleEntry>,
}

impl Schedule {
    /// End of the last entry.
    pub fn total_duration_us(&self) -> f64 {
        self.entries.last().map(|e| e.start_us() + e.duration_us()).unwrap_or(0.0)
    }

    pub fn num_pulses(&self) -> usize {
        self.entries.iter().filter(|e| matches!(e, ScheduleEntry::Pulse { .. })).count()
    }

    /// Ordering, overlap and amplitude checks.
    pub fn validate(&self) -> Result<(), AssembleError> {
        if self.entries.is_empty() {
            return Err(AssembleError::Empty);
        }
        let mut prev_end = f64::NEG_INFINITY;
        let mut prev_start = f64::NEG_INFINITY;
        for (index, e) in self.entries.iter().enumerate() {
            let start = e.start_us();
            if !(start.is_finite() && start > prev_start && start >= prev_end) {
                return Err(AssembleError::Timing {
                    index,
                    reason: format!("starts at {start} µs, previous ends at {prev_end} µs"),
                });
            }
            if let ScheduleEntry::Pulse { model, channels, duration_us, .. } = e {
                if !(duration_us.is_finite() && *duration_us > 0.0) {
                    return Err(AssembleError::Timing { index, reason: format!("duration {duration_us} µs") });
                }
                let limit = self.device.omega_max * (1.0 + 1e-12);
                for ch in channels {
                    if ch.samples.len() != model.num_tslots {
                        return Err(AssembleError::Timing {
                            index,
                            reason: format!(
                                "channel {} has {} samples for {} slots",
                                ch.name,
                                ch.samples.len(),
                                model.num_tslots
                            ),
                        });
                    }
                    if let Some(bad) = ch.samples.iter().find(|u| {
                        let v = u.abs() * self.drive_scale_rad_s;
                        v.is_nan() || v > limit
                    }) {
                        return Err(AssembleError::Amplitude { index, channel: ch.name.clone(), value: *bad });
                    }
                }
            }
            prev_start = start;
            prev_end = start + e.duration_us();
        }
        Ok(())
    }
}

/// `ω_L = ω_q − ω_m + Δ`.
pub fn laser_frequency(device: &DeviceSpec) -> Result<f64, AssembleError> {
    let omega_q = device.omega_q.ok_or_else(|| AssembleError::MissingQubitFrequency(device.name.clone()))?;
    Ok(omega_q - device.omega_m + device.delta)
}

/// Single-qubit gates that may appear as markers.
pub fn ideal_gate_unitary(name: &str, space: FockSpace) -> Result<ComplexMatrix, AssembleError> {
    let q = match name {
        "H" => hadamard(),
        "X" => sigma_x(),
        "Z" => sigma_z(),
        other => return Err(AssembleError::UnknownMarker(other.to_string())),
    };
    Ok(kron(&q, &identity(space.dim())))
}

/// Propagates every pulse from its exported samples and applies the ideal
/// markers, in schedule order. Each pulse acts in its own frame; buffers are
/// idle.
pub fn simulate_schedule(schedule: &Schedule, registry: &GateRegistry) -> Result<ComplexMatrix, Error> {
    schedule.validate()?;
    let mut total: Option<ComplexMatrix> = None;
    let mut space: Option<FockSpace> = None;
    for e in &schedule.entries {
        let u = match e {
            ScheduleEntry::Pulse { gate, model, channels, .. } => {
                let problem = registry.get(&gate.gate_type)?.build_hamiltonian(gate, &schedule.device, model)?;
                space.get_or_insert(problem.space);
                let waveforms: Vec<Vec<f64>> = channels.iter().map(|c| c.samples.clone()).collect();
                propagate(&problem, &waveforms)?
            }
            ScheduleEntry::Marker { name, .. } => {
                let sp = space.ok_or(AssembleError::LeadingMarker)?;
                ideal_gate_unitary(name, sp)?
            }
        };
        total = Some(match total {
            None => u,
            Some(t) => {
                if t.nrows() != u.nrows() {
                    return Err(AssembleError::MixedSpaces.into());
                }
                u * t
            }
        });
    }
    total.ok_or_else(|| AssembleError::Empty.into())
}

enum CircuitItem {
    Gate(Arc<CompiledGate>),
    Ideal { name: String, qubit: usize },
}

/// Builds a circuit gate by gate and assembles it into a [`Schedule`].
pub struct CircuitExporter {
    codebook: Arc<Codebook>,
    device: DeviceSpec,
    model_override: Option<ModelSpec>,
    buffer_us: f64,
    name: String,
    items: Vec<CircuitItem>,
}

impl CircuitExporter {
    pub fn new(codebook: Arc<Codebook>, device: DeviceSpec) -> Self {
        Self {
            codebook,
            device,
            model_override: None,
            buffer_us: DEFAULT_BUFFER_US,
            name: "circuit".into(),
            items: Vec::new(),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_buffer_us(mut self, buffer_us: f64) -> Self {
        self.buffer_us = buffer_us;
        self
    }

    /// Model used for every gate added afterwards instead of the per-gate
    /// registry defaults.
    pub fn with_model(mut self, model: ModelSpec) -> Self {
        self.model_override = Some(model);
        self
    }

    pub fn device(&self) -> &DeviceSpec {
        &self.device
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn model_for(&self, gate_type: &str) -> Result<ModelSpec, Error> {
        match &self.model_override {
            Some(m) => Ok(m.clone()),
            None => Ok(self.codebook.registry().default_model(gate_type)?),
        }
    }

    pub fn add_gate(&mut self, gate: GateSpec) -> Result<Arc<CompiledGate>, Error> {
        let model = self.model_for(&gate.gate_type)?;
        self.add_gate_with_model(gate, model)
    }

    pub fn add_gate_with_model(&mut self, gate: GateSpec, model: ModelSpec) -> Result<Arc<CompiledGate>, Error> {
        let gate = self.codebook.registry().normalize(&gate)?;
        let cg = Arc::new(CompiledGate::new(Arc::clone(&self.codebook), gate, self.device.clone(), model));
        self.items.push(CircuitItem::Gate(Arc::clone(&cg)));
        Ok(cg)
    }

    pub fn add_compiled(&mut self, cg: Arc<CompiledGate>) {
        self.items.push(CircuitItem::Gate(cg));
    }

    pub fn add_cd(&mut self, alpha: Complex64) -> Result<Arc<CompiledGate>, Error> {
        self.add_gate(GateSpec::cd(alpha)?)
    }

    pub fn add_cr(&mut self, theta: f64) -> Result<Arc<CompiledGate>, Error> {
        self.add_gate(GateSpec::cr(theta)?)
    }

    pub fn add_cs(&mut self, zeta: Complex64) -> Result<Arc<CompiledGate>, Error> {
        self.add_gate(GateSpec::cs(zeta)?)
    }

    pub fn add_ideal(&mut self, name: &str, qubit: usize) -> Result<(), Error> {
        ideal_gate_unitary(name, FockSpace::with_dim(2)?)?;
        self.items.push(CircuitItem::Ideal { name: name.to_string(), qubit });
        Ok(())
    }

    pub fn add_hadamard(&mut self, qubit: usize) -> Result<(), Error> {
        self.add_ideal("H", qubit)
    }

    /// Resolves every gate (lookup first, synthesis on a miss) and lays the
    /// entries out back to back with `buffer_us` between consecutive ones.
    pub fn assemble(&self) -> Result<Schedule, Error> {
        if self.items.is_empty() {
            return Err(AssembleError::Empty.into());
        }
        if !(self.buffer_us.is_finite() && self.buffer_us > 0.0) {
            return Err(AssembleError::Buffer(self.buffer_us).into());
        }
        let omega_l = laser_frequency(&self.device)?;
        let mut entries = Vec::with_capacity(self.items.len());
        let mut t = 0.0;
        for (index, item) in self.items.iter().enumerate() {
            if index > 0 {
                t += self.buffer_us;
            }
            match item {
                CircuitItem::Gate(cg) => {
                    let pulse = cg.pulse().map_err(|e| AssembleError::Gate { index, source: Box::new(e) })?;
                    entries.push(ScheduleEntry::Pulse {
                        gate: pulse.gate.clone(),
                        model: pulse.model.clone(),
                        key: pulse.key.clone(),
                        t_start_us: t,
                        duration_us: pulse.duration_us,
                        omega_l_rad_s: omega_l,
                        channels: pulse
                            .channels
                            .iter()
                            .zip(&pulse.waveforms)
                            .map(|(name, samples)| Channel { name: name.clone(), samples: samples.clone() })
                            .collect(),
                    });
                    t += pulse.duration_us;
                }
                CircuitItem::Ideal { name, qubit } => {
                    entries.push(ScheduleEntry::Marker { name: name.clone(), qubit: *qubit, t_us: t });
                }
            }
        }
        let schedule = Schedule {
            name: self.name.clone(),
            device: self.device.clone(),
            drive_scale_rad_s: self.device.omega_max,
            buffer_us: self.buffer_us,
            entries,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Assembles and writes one file per backend into `out_dir`.
    pub fn export(&self, out_dir: &Path, backends: &[ExportBackend]) -> Result<Vec<PathBuf>, Error> {
        let schedule = self.assemble()?;
        backends.iter().map(|b| Ok(write_schedule(&schedule, out_dir, *b)?)).collect()
    }
}
