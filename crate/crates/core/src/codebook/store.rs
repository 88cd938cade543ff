// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! On-disk pulse records.
//!
//! Layout: `<root>/<key[0..2]>/<key>.json`. Each file is a [`PulseSpec`]
//! (schema version [`PULSE_FORMAT_VERSION`]) carrying its own (gate, device,
//! model) snapshots, so its key can be recomputed on read, plus a checksum
//! over the whole record so edits to waveforms or metadata are caught too.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::canonical::{request_hash, sha256_hex, Canon};
use super::{CodebookError, ModelSpec};
use crate::device::DeviceSpec;
use crate::gates::GateSpec;

pub const PULSE_FORMAT_VERSION: u32 = 1;

/// An optimized pulse and everything needed to re-simulate or export it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub format_version: u32,
    pub key: String,
    pub gate: GateSpec,
    pub device: DeviceSpec,
    pub model: ModelSpec,
    pub channels: Vec<String>,
    /// `waveforms[channel][slot]`, dimensionless, within `±amp_bound`.
    pub waveforms: Vec<Vec<f64>>,
    pub duration_us: f64,
    pub amp_bound: f64,
    pub achieved_fidelity: f64,
    pub iterations: usize,
    pub converged: bool,
    pub created_at: String,
    pub checksum: String,
}

impl PulseSpec {
    /// SHA-256 over the canonical form of every field except the checksum.
    pub fn compute_checksum(&self) -> Result<String, CodebookError> {
        let mut value = serde_json::to_value(self).map_err(|e| CodebookError::Serde(e.to_string()))?;
        if let Some(map) = value.as_object_mut() {
            map.remove("checksum");
        }
        Ok(sha256_hex(&Canon::from_json(&value).to_bytes()?))
    }

    pub fn seal(mut self) -> Result<Self, CodebookError> {
        self.checksum = self.compute_checksum()?;
        Ok(self)
    }

    pub fn num_tslots(&self) -> usize {
        self.waveforms.first().map(Vec::len).unwrap_or(0)
    }

    pub fn dt_us(&self) -> f64 {
        self.duration_us / self.num_tslots() as f64
    }

    /// Structural invariants plus key and checksum integrity.
    pub fn verify(&self) -> Result<(), String> {
        if self.format_version != PULSE_FORMAT_VERSION {
            return Err(format!("unsupported format_version {}", self.format_version));
        }
        if self.channels.len() != self.waveforms.len() || self.channels.is_empty() {
            return Err("channel names do not match waveforms".into());
        }
        if self.waveforms.iter().any(|w| w.len() != self.model.num_tslots) {
            return Err(format!("waveform length differs from num_tslots = {}", self.model.num_tslots));
        }
        let bound = self.amp_bound * (1.0 + 1e-12);
        if let Some(bad) = self.waveforms.iter().flatten().find(|u| !u.is_finite() || u.abs() > bound) {
            return Err(format!("sample {bad} outside ±{}", self.amp_bound));
        }
        if !(self.duration_us.is_finite() && self.duration_us > 0.0) {
            return Err(format!("bad duration {}", self.duration_us));
        }
        if !(0.0..=1.0 + 1e-9).contains(&self.achieved_fidelity) {
            return Err(format!("fidelity {} outside [0, 1]", self.achieved_fidelity));
        }
        let recomputed = request_hash(&self.gate, &self.device, &self.model).map_err(|e| e.to_string())?;
        if recomputed != self.key {
            return Err(format!("key mismatch: stored {}, recomputed {recomputed}", self.key));
        }
        let checksum = self.compute_checksum().map_err(|e| e.to_string())?;
        if checksum != self.checksum {
            return Err("checksum mismatch (record was modified after sealing)".into());
        }
        Ok(())
    }
}

pub fn path_for(root: &Path, key: &str) -> PathBuf {
    let shard = key.get(..2).unwrap_or("xx");
    root.join(shard).join(format!("{key}.json"))
}

/// Writes via a temp file in the destination directory and an atomic rename,
/// so concurrent writers of the same key never expose a partial file.
pub fn write_pulse(root: &Path, pulse: &PulseSpec) -> Result<PathBuf, CodebookError> {
    pulse.verify().map_err(CodebookError::Invalid)?;
    let path = path_for(root, &pulse.key);
    let dir = path.parent().expect("pulse path has a shard directory");
    fs::create_dir_all(dir).map_err(|e| CodebookError::io(dir, e))?;
    let body = serde_json::to_vec_pretty(pulse).map_err(|e| CodebookError::Serde(e.to_string()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CodebookError::io(dir, e))?;
    tmp.write_all(&body).map_err(|e| CodebookError::io(&path, e))?;
    tmp.as_file().sync_all().map_err(|e| CodebookError::io(&path, e))?;
    tmp.persist(&path).map_err(|e| CodebookError::io(&path, e.error))?;
    Ok(path)
}

/// Reads and fully verifies a pulse file. The file name must match the key.
pub fn read_pulse(path: &Path) -> Result<PulseSpec, CodebookError> {
    let text = fs::read(path).map_err(|e| CodebookError::io(path, e))?;
    let corrupt = |reason: String| CodebookError::Corrupt { path: path.to_path_buf(), reason };
    let pulse: PulseSpec = serde_json::from_slice(&text).map_err(|e| corrupt(e.to_string()))?;
    pulse.verify().map_err(corrupt)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    if stem != pulse.key {
        return Err(corrupt(format!("file name {stem} does not match key {}", pulse.key)));
    }
    Ok(pulse)
}

/// Every `*.json` under the two-hex-digit shard directories, sorted.
pub fn list_pulse_files(root: &Path) -> Result<Vec<PathBuf>, CodebookError> {
    let mut files = Vec::new();
    let shards = match fs::read_dir(root) {
        Ok(it) => it,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(files),
        Err(e) => return Err(CodebookError::io(root, e)),
    };
    for shard in shards {
        let shard = shard.map_err(|e| CodebookError::io(root, e))?.path();
        let is_shard = shard.is_dir()
            && shard
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.len() == 2 && n.chars().all(|c| c.is_ascii_hexdigit()));
        if !is_shard {
            continue;
        }
        for entry in fs::read_dir(&shard).map_err(|e| CodebookError::io(&shard, e))? {
            let p = entry.map_err(|e| CodebookError::io(&shard, e))?.path();
            if p.extension().is_some_and(|e| e == "json") {
                files.push(p);
            }
        }
    }
    files.sort();
    Ok(files)
}
