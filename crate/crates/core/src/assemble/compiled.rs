// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use crate::codebook::{Codebook, ModelSpec, PulseSpec, Strategy};
use crate::device::DeviceSpec;
use crate::gates::GateSpec;
use crate::linalg::ComplexMatrix;
use crate::synth::propagate;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    /// Only the exact (gate, device, model) key is served from the library.
    #[default]
    Exact,
    /// On an exact miss, fall back to the best cached pulse for the same
    /// gate physics on the same device, whatever model produced it.
    Fuzzy,
}

/// Lazy handle on one gate. Nothing is looked up or optimized until
/// [`pulse`](Self::pulse) or [`unitary`](Self::unitary) is called; both
/// results are memoized, and concurrent first use resolves at most once.
#[derive(Debug)]
pub struct CompiledGate {
    codebook: Arc<Codebook>,
    gate: GateSpec,
    device: DeviceSpec,
    model: ModelSpec,
    mode: MatchMode,
    strategy: Strategy,
    pulse: Mutex<Option<Arc<PulseSpec>>>,
    unitary: Mutex<Option<Arc<ComplexMatrix>>>,
    propagations: AtomicUsize,
}

impl CompiledGate {
    pub fn new(codebook: Arc<Codebook>, gate: GateSpec, device: DeviceSpec, model: ModelSpec) -> Self {
        Self {
            codebook,
            gate,
            device,
            model,
            mode: MatchMode::Exact,
            strategy: Strategy::Hybrid,
            pulse: Mutex::new(None),
            unitary: Mutex::new(None),
            propagations: AtomicUsize::new(0),
        }
    }

    /// Physics-only handle: the model comes from the registry defaults for
    /// the gate type and lookups fall back to fuzzy matching.
    pub fn from_physics(codebook: Arc<Codebook>, gate: GateSpec, device: DeviceSpec) -> Result<Self, Error> {
        let model = codebook.registry().default_model(&gate.gate_type)?;
        Ok(Self::new(codebook, gate, device, model).with_mode(MatchMode::Fuzzy))
    }

    pub fn with_mode(mut self, mode: MatchMode) -> Self {
        self.mode = mode;
        self
    }

    /// `Lookup` turns a library miss into an error instead of a synthesis.
    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn gate(&self) -> &GateSpec {
        &self.gate
    }

    pub fn device(&self) -> &DeviceSpec {
        &self.device
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn mode(&self) -> MatchMode {
        self.mode
    }

    /// Number of times this handle has propagated its waveform.
    pub fn propagations(&self) -> usize {
        self.propagations.load(Ordering::SeqCst)
    }

    pub fn is_resolved(&self) -> bool {
        self.pulse.lock().expect("pulse slot poisoned").is_some()
    }

    /// Exact lookup, then (fuzzy mode) best same-physics entry, then
    /// synthesis under the handle's strategy.
    pub fn pulse(&self) -> Result<Arc<PulseSpec>, Error> {
        let mut slot = self.pulse.lock().expect("pulse slot poisoned");
        if let Some(p) = slot.as_ref() {
            return Ok(Arc::clone(p));
        }
        let resolved = match self.mode {
            MatchMode::Exact => self.codebook.compile_pulse(&self.gate, &self.device, &self.model, self.strategy)?,
            MatchMode::Fuzzy => match self.codebook.fuzzy_lookup(&self.gate, &self.device, Some(&self.model))? {
                Some(p) => p,
                None => self.codebook.compile_pulse(&self.gate, &self.device, &self.model, self.strategy)?,
            },
        };
        let resolved = Arc::new(resolved);
        *slot = Some(Arc::clone(&resolved));
        Ok(resolved)
    }

    /// Propagator of the resolved pulse under the Hamiltonian of the pulse's
    /// own (gate, device, model) snapshot.
    pub fn unitary(&self) -> Result<Arc<ComplexMatrix>, Error> {
        let mut slot = self.unitary.lock().expect("unitary slot poisoned");
        if let Some(u) = slot.as_ref() {
            return Ok(Arc::clone(u));
        }
        let pulse = self.pulse()?;
        let problem = self.codebook.problem_for(&pulse)?;
        let u = Arc::new(propagate(&problem, &pulse.waveforms)?);
        self.propagations.fetch_add(1, Ordering::SeqCst);
        *slot = Some(Arc::clone(&u));
        Ok(u)
    }
}
