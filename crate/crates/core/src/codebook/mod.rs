// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Content-addressed pulse library.
//!
//! Every pulse is keyed by `SHA-256(canonical(gate, device, model))`, so a
//! change to any calibration number or optimizer setting produces a new key
//! and stale pulses are simply never served again. Entries are never deleted
//! by lookups.

mod canonical;
mod store;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use canonical::{
    canonical_serialize, device_canon, format_float, gate_canon, model_canon, request_hash, sha256_hex, Canon,
    CanonicalError, CANONICAL_SCHEMA,
};
pub use store::{list_pulse_files, path_for, read_pulse, write_pulse, PulseSpec, PULSE_FORMAT_VERSION};

use crate::device::DeviceSpec;
use crate::gates::{GateRegistry, GateSpec};
use crate::linalg::{FockSpace, LinalgError};
use crate::synth::ControlProblem;
use crate::Error;

/// Environment variable naming the library directory.
pub const LIBRARY_ROOT_ENV: &str = "PULSE_LIBRARY_ROOT";

/// Non-converged pulses at or above this fidelity are still cached.
pub const DEFAULT_CACHE_FLOOR: f64 = 0.98;

#[derive(Debug, thiserror::Error)]
pub enum CodebookError {
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("no cached pulse for {gate} (key {key}); run with the synthesize or hybrid strategy")]
    Miss { gate: String, key: String },
    #[error("corrupt library entry {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("refusing to store invalid pulse: {0}")]
    Invalid(String),
    #[error("library I/O on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("serialization failed: {0}")]
    Serde(String),
    #[error(
        "optimizer stopped at F = {fidelity:.6} without reaching 1 - F <= {fid_tol:e}{}",
        if *stored { " (cached anyway)" } else { "" }
    )]
    NotConverged { fidelity: f64, fid_tol: f64, stored: bool, pulse: Box<PulseSpec> },
}

impl CodebookError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CodebookError::Io { path: path.to_path_buf(), source }
    }
}

/// Numerical model settings. Part of every library key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    /// Highest Fock level kept; the oscillator dimension is `n_max + 1`.
    pub n_max: usize,
    pub num_tslots: usize,
    pub duration_us: f64,
    /// Bound on every dimensionless control sample.
    pub amp_bound: f64,
    /// Converged once `1 - F <= fid_tol`.
    pub fid_tol: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            n_max: 15,
            num_tslots: 200,
            duration_us: 100.0,
            amp_bound: 1.0,
            fid_tol: 1e-3,
            grad_tol: 1e-8,
            max_iter: 500,
            seed: 0,
        }
    }
}

impl ModelSpec {
    pub fn validate(&self) -> Result<(), CodebookError> {
        let bad = |msg: String| Err(CodebookError::InvalidModel(msg));
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.n_max < 2 {
            return bad(format!("n_max must be at least 2, got {}", self.n_max));
        }
        if self.num_tslots == 0 {
            return bad("num_tslots must be at least 1".into());
        }
        if !positive(self.duration_us) {
            return bad(format!("duration_us must be positive, got {}", self.duration_us));
        }
        if !positive(self.amp_bound) {
            return bad(format!("amp_bound must be positive, got {}", self.amp_bound));
        }
        if !positive(self.fid_tol) || !positive(self.grad_tol) {
            return bad(format!(
                "tolerances must be positive, got fid_tol={} grad_tol={}",
                self.fid_tol, self.grad_tol
            ));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        Ok(())
    }

    pub fn space(&self) -> Result<FockSpace, LinalgError> {
        FockSpace::from_n_max(self.n_max)
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_us * 1e-6
    }

    pub fn dt_s(&self) -> f64 {
        self.duration_s() / self.num_tslots as f64
    }
}

/// How [`Codebook::compile_pulse`] treats the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Library only; a miss is an error.
    Lookup,
    /// Always optimize, then store.
    Synthesize,
    /// Look up first; optimize and store on a miss.
    #[default]
    Hybrid,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lookup" => Ok(Strategy::Lookup),
            "synthesize" | "synth" => Ok(Strategy::Synthesize),
            "hybrid" => Ok(Strategy::Hybrid),
            other => Err(format!("unknown strategy '{other}' (lookup, synthesize, hybrid)")),
        }
    }
}

/// Counter snapshot; see [`Codebook::stats`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CodebookStats {
    /// Optimizer invocations.
    pub syntheses: usize,
    /// Exact-key library probes.
    pub lookups: usize,
    pub hits: usize,
    /// Sum of optimizer iterations over all syntheses.
    pub optimizer_iterations: usize,
}

/// `$PULSE_LIBRARY_ROOT`, or `./library`.
pub fn default_library_root() -> PathBuf {
    std::env::var_os(LIBRARY_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("library"))
}

/// A library directory plus the gate registry used to normalize and
/// synthesize requests.
///
/// Safe to share between threads; several processes may also point at the
/// same directory, since writes are atomic renames of content-addressed
/// files.
#[derive(Debug)]
pub struct Codebook {
    root: PathBuf,
    registry: Arc<GateRegistry>,
    cache_floor: f64,
    syntheses: AtomicUsize,
    lookups: AtomicUsize,
    hits: AtomicUsize,
    iterations: AtomicUsize,
}

impl Codebook {
    pub fn new(root: impl Into<PathBuf>, registry: Arc<GateRegistry>) -> Self {
        Self {
            root: root.into(),
            registry,
            cache_floor: DEFAULT_CACHE_FLOOR,
            syntheses: AtomicUsize::new(0),
            lookups: AtomicUsize::new(0),
            hits: AtomicUsize::new(0),
            iterations: AtomicUsize::new(0),
        }
    }

    /// Built-in gates at [`default_library_root`].
    pub fn open_default() -> Self {
        Self::new(default_library_root(), Arc::new(GateRegistry::with_builtins()))
    }

    pub fn with_cache_floor(mut self, floor: f64) -> Self {
        self.cache_floor = floor;
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn registry(&self) -> &Arc<GateRegistry> {
        &self.registry
    }

    pub fn stats(&self) -> CodebookStats {
        CodebookStats {
            syntheses: self.syntheses.load(Ordering::SeqCst),
            lookups: self.lookups.load(Ordering::SeqCst),
            hits: self.hits.load(Ordering::SeqCst),
            optimizer_iterations: self.iterations.load(Ordering::SeqCst),
        }
    }

    /// Normalized gate and its library key.
    pub fn key_for(
        &self,
        gate: &GateSpec,
        device: &DeviceSpec,
        model: &ModelSpec,
    ) -> Result<(GateSpec, String), Error> {
        model.validate()?;
        device.validate()?;
        let plugin = self.registry.get(&gate.gate_type)?;
        let gate = self.registry.normalize(gate)?;
        let key = plugin.pulse_lookup_key(&gate, device, model)?;
        Ok((gate, key))
    }

    /// Exact-key probe.
    pub fn lookup(&self, gate: &GateSpec, device: &DeviceSpec, model: &ModelSpec) -> Result<Option<PulseSpec>, Error> {
        let (_, key) = self.key_for(gate, device, model)?;
        self.lookup_key(&key)
    }

    pub fn lookup_key(&self, key: &str) -> Result<Option<PulseSpec>, Error> {
        self.lookups.fetch_add(1, Ordering::SeqCst);
        let path = path_for(&self.root, key);
        if !path.exists() {
            return Ok(None);
        }
        let pulse = read_pulse(&path)?;
        self.hits.fetch_add(1, Ordering::SeqCst);
        Ok(Some(pulse))
    }

    pub fn store(&self, pulse: &PulseSpec) -> Result<PathBuf, Error> {
        Ok(write_pulse(&self.root, pulse)?)
    }

    pub fn path_of(&self, key: &str) -> PathBuf {
        path_for(&self.root, key)
    }

    /// Runs the optimizer and stores the result when it converged or reached
    /// the cache floor.
    pub fn synthesize(&self, gate: &GateSpec, device: &DeviceSpec, model: &ModelSpec) -> Result<PulseSpec, Error> {
        let (gate, key) = self.key_for(gate, device, model)?;
        let plugin = self.registry.get(&gate.gate_type)?;
        self.syntheses.fetch_add(1, Ordering::SeqCst);
        log::info!("synthesizing {} ({key})", gate.label());
        let outcome = plugin.synthesize(&gate, device, model)?;
        self.iterations.fetch_add(outcome.iterations, Ordering::SeqCst);
        let pulse = PulseSpec {
            format_version: PULSE_FORMAT_VERSION,
            key,
            gate,
            device: device.clone(),
            model: model.clone(),
            channels: outcome.channels.clone(),
            waveforms: outcome.waveforms.clone(),
            duration_us: model.duration_us,
            amp_bound: model.amp_bound,
            achieved_fidelity: outcome.fidelity.clamp(0.0, 1.0),
            iterations: outcome.iterations,
            converged: outcome.converged,
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            checksum: String::new(),
        }
        .seal()?;
        let keep = outcome.converged || pulse.achieved_fidelity >= self.cache_floor;
        if keep {
            self.store(&pulse)?;
        }
        if !outcome.converged {
            return Err(CodebookError::NotConverged {
                fidelity: pulse.achieved_fidelity,
                fid_tol: model.fid_tol,
                stored: keep,
                pulse: Box::new(pulse),
            }
            .into());
        }
        Ok(pulse)
    }

    pub fn compile_pulse(
        &self,
        gate: &GateSpec,
        device: &DeviceSpec,
        model: &ModelSpec,
        strategy: Strategy,
    ) -> Result<PulseSpec, Error> {
        match strategy {
            Strategy::Synthesize => self.synthesize(gate, device, model),
            Strategy::Lookup | Strategy::Hybrid => {
                let (normalized, key) = self.key_for(gate, device, model)?;
                if let Some(pulse) = self.lookup_key(&key)? {
                    return Ok(pulse);
                }
                if strategy == Strategy::Lookup {
                    return Err(CodebookError::Miss { gate: normalized.label(), key }.into());
                }
                self.synthesize(&normalized, device, model)
            }
        }
    }

    /// Rebuilds the control problem a pulse was optimized against.
    pub fn problem_for(&self, pulse: &PulseSpec) -> Result<ControlProblem, Error> {
        let plugin = self.registry.get(&pulse.gate.gate_type)?;
        plugin.build_hamiltonian(&pulse.gate, &pulse.device, &pulse.model)
    }

    /// Every readable entry. Corrupt files are skipped with a warning.
    pub fn entries(&self) -> Result<Vec<PulseSpec>, Error> {
        let mut out = Vec::new();
        for path in list_pulse_files(&self.root)? {
            match read_pulse(&path) {
                Ok(p) => out.push(p),
                Err(e) => log::warn!("skipping {e}"),
            }
        }
        Ok(out)
    }

    /// Exact key first (when a model is given), otherwise the highest
    /// fidelity entry for the same normalized gate on the same device.
    /// Ties break on the smaller key.
    pub fn fuzzy_lookup(
        &self,
        gate: &GateSpec,
        device: &DeviceSpec,
        model: Option<&ModelSpec>,
    ) -> Result<Option<PulseSpec>, Error> {
        if let Some(model) = model {
            if let Some(hit) = self.lookup(gate, device, model)? {
                return Ok(Some(hit));
            }
        }
        let gate = self.registry.normalize(gate)?;
        let want_gate = gate_canon(&gate).to_bytes()?;
        let want_device = device_canon(device).to_bytes()?;
        let mut best: Option<PulseSpec> = None;
        for p in self.entries()? {
            let same =
                gate_canon(&p.gate).to_bytes()? == want_gate && device_canon(&p.device).to_bytes()? == want_device;
            if !same {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => {
                    p.achieved_fidelity > b.achieved_fidelity
                        || (p.achieved_fidelity == b.achieved_fidelity && p.key < b.key)
                }
            };
            if better {
                best = Some(p);
            }
        }
        Ok(best)
    }
}
