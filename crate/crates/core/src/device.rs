// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Device calibration: [`DeviceSpec`], the TOML calibration file format and
//! the [`CalibrationResolver`] that maps (ion, mode) pairs onto effective
//! Lamb-Dicke parameters.
//!
//! A calibration file is a flat TOML document:
//!
//! ```toml
//! format_version = 1
//! name = "sydney_gkp_v1"
//! eta = 0.083
//! omega_m = "2pi*1.33M"      # rad/s, or 2pi*<Hz> shorthand
//! omega_j = "2pi*2.4k"
//! delta = "2pi*10k"
//! omega_max = "2pi*80k"
//! omega_q = "2pi*12.642812118G"   # optional, needed for export
//! participation = [[1.0]]    # [mode][ion]
//!
//! [coherence]
//! motional_dephasing_hz = 18.0
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{parse_angular, UnitError};

pub const DEVICE_FORMAT_VERSION: u32 = 1;

/// Coherence map key for the motional dephasing rate γ (Hz).
pub const MOTIONAL_DEPHASING: &str = "motional_dephasing_hz";

const SYDNEY_GKP_V1: &str = include_str!("../devices/sydney_gkp_v1.toml");

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("cannot read device file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed device file: {0}")]
    Parse(String),
    #[error("unsupported device format_version {0} (expected {DEVICE_FORMAT_VERSION})")]
    Version(u32),
    #[error("invalid device field {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Unit(#[from] UnitError),
    #[error("ion {ion}, mode {mode} outside participation matrix ({modes} modes x {ions} ions)")]
    OutOfRange { ion: usize, mode: usize, modes: usize, ions: usize },
    #[error("unknown bundled device '{0}'")]
    UnknownBundled(String),
}

/// Hardware calibration. All angular frequencies are in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub name: String,
    /// Single-ion Lamb-Dicke parameter of the reference mode.
    pub eta: f64,
    pub omega_m: f64,
    /// Sideband Rabi rate.
    pub omega_j: f64,
    /// Sideband detuning.
    pub delta: f64,
    /// Full-scale drive Rabi rate; a dimensionless control amplitude `u`
    /// corresponds to a physical drive `u · omega_max`.
    pub omega_max: f64,
    pub omega_q: Option<f64>,
    /// `participation[mode][ion] = b_kj`.
    pub participation: Vec<Vec<f64>>,
    pub coherence: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Angular {
    Number(f64),
    Text(String),
}

impl Angular {
    fn value(&self) -> Result<f64, UnitError> {
        match self {
            Angular::Number(v) => Ok(*v),
            Angular::Text(s) => parse_angular(s),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceFile {
    format_version: u32,
    name: String,
    eta: f64,
    omega_m: Angular,
    omega_j: Angular,
    #[serde(default)]
    delta: Option<Angular>,
    omega_max: Angular,
    #[serde(default)]
    omega_q: Option<Angular>,
    #[serde(default)]
    participation: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    coherence: BTreeMap<String, f64>,
}

fn finite(field: &'static str, v: f64) -> Result<f64, DeviceError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DeviceError::Invalid { field, reason: format!("non-finite value {v}") })
    }
}

fn positive(field: &'static str, v: f64) -> Result<f64, DeviceError> {
    finite(field, v)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(DeviceError::Invalid { field, reason: format!("must be positive, got {v}") })
    }
}

impl DeviceSpec {
    /// Parses a calibration document.
    pub fn from_toml_str(text: &str) -> Result<Self, DeviceError> {
        let file: DeviceFile = toml::from_str(text).map_err(|e| DeviceError::Parse(e.to_string()))?;
        if file.format_version != DEVICE_FORMAT_VERSION {
            return Err(DeviceError::Version(file.format_version));
        }
        let spec = DeviceSpec {
            name: file.name,
            eta: file.eta,
            omega_m: file.omega_m.value()?,
            omega_j: file.omega_j.value()?,
            delta: file.delta.map(|d| d.value()).transpose()?.unwrap_or(0.0),
            omega_max: file.omega_max.value()?,
            omega_q: file.omega_q.map(|q| q.value()).transpose()?,
            participation: file.participation.unwrap_or_else(|| vec![vec![1.0]]),
            coherence: file.coherence,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        if self.name.trim().is_empty() {
            return Err(DeviceError::Invalid { field: "name", reason: "empty".into() });
        }
        finite("eta", self.eta)?;
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(DeviceError::Invalid { field: "eta", reason: format!("{} not in (0, 1)", self.eta) });
        }
        positive("omega_m", self.omega_m)?;
        positive("omega_j", self.omega_j)?;
        positive("omega_max", self.omega_max)?;
        finite("delta", self.delta)?;
        if let Some(q) = self.omega_q {
            positive("omega_q", q)?;
        }
        let ions = self.participation.first().map(Vec::len).unwrap_or(0);
        if ions == 0 || self.participation.iter().any(|row| row.len() != ions) {
            return Err(DeviceError::Invalid {
                field: "participation",
                reason: "must be a non-empty rectangular [mode][ion] matrix".into(),
            });
        }
        for &b in self.participation.iter().flatten() {
            finite("participation", b)?;
            if b.abs() > 1.0 {
                return Err(DeviceError::Invalid {
                    field: "participation",
                    reason: format!("|b| = {} exceeds 1", b.abs()),
                });
            }
        }
        for &v in self.coherence.values() {
            finite("coherence", v)?;
            if v < 0.0 {
                return Err(DeviceError::Invalid { field: "coherence", reason: format!("negative rate {v}") });
            }
        }
        Ok(())
    }

    pub fn num_modes(&self) -> usize {
        self.participation.len()
    }

    pub fn num_ions(&self) -> usize {
        self.participation.first().map(Vec::len).unwrap_or(0)
    }

    /// Motional dephasing rate γ in Hz, zero when the file does not set one.
    pub fn motional_dephasing(&self) -> f64 {
        self.coherence.get(MOTIONAL_DEPHASING).copied().unwrap_or(0.0)
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }
}

/// Reads and validates a calibration file.
pub fn load_device(path: impl AsRef<Path>) -> Result<DeviceSpec, DeviceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DeviceError::Io { path: path.to_path_buf(), source })?;
    DeviceSpec::from_toml_str(&text)
}

/// Calibration files shipped with the crate.
pub fn bundled_device(name: &str) -> Result<DeviceSpec, DeviceError> {
    match name {
        "sydney_gkp_v1" => DeviceSpec::from_toml_str(SYDNEY_GKP_V1),
        other => Err(DeviceError::UnknownBundled(other.to_string())),
    }
}

pub fn bundled_device_names() -> &'static [&'static str] {
    &["sydney_gkp_v1"]
}

/// Either a path to a calibration file or the name of a bundled device.
pub fn resolve_device(name_or_path: &str) -> Result<DeviceSpec, DeviceError> {
    if bundled_device_names().contains(&name_or_path) && !Path::new(name_or_path).exists() {
        bundled_device(name_or_path)
    } else {
        load_device(name_or_path)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedCoupling {
    pub eta: f64,
    pub extras: BTreeMap<String, f64>,
}

/// Maps an (ion, mode) pair to the coupling the synthesis layer consumes.
pub trait CalibrationResolver {
    fn resolve(&self, ion: usize, mode: usize) -> Result<ResolvedCoupling, DeviceError>;
}

impl CalibrationResolver for DeviceSpec {
    fn resolve(&self, ion: usize, mode: usize) -> Result<ResolvedCoupling, DeviceError> {
        let eta = resolve_eta(self, ion, mode)?;
        let mut extras = BTreeMap::new();
        extras.insert("participation".to_string(), self.participation[mode][ion]);
        extras.insert("omega_m".to_string(), self.omega_m);
        Ok(ResolvedCoupling { eta, extras })
    }
}

/// `η_kj = b_kj · η_k`.
pub fn resolve_eta(device: &DeviceSpec, ion: usize, mode: usize) -> Result<f64, DeviceError> {
    let out_of_range = || DeviceError::OutOfRange { ion, mode, modes: device.num_modes(), ions: device.num_ions() };
    let row = device.participation.get(mode).ok_or_else(out_of_range)?;
    let b = row.get(ion).ok_or_else(out_of_range)?;
    Ok(b * device.eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn sydney() -> DeviceSpec {
        bundled_device("sydney_gkp_v1").unwrap()
    }

    #[test]
    fn bundled_device_matches_table() {
        let d = sydney();
        assert_eq!(d.eta, 0.083);
        assert_eq!(d.omega_m, TAU * 1.33e6);
        assert_eq!(d.omega_j, TAU * 2.4e3);
        assert_eq!(d.delta, TAU * 1e4);
        assert_eq!(d.motional_dephasing(), 18.0);
    }

    #[test]
    fn rejects_nan_and_negative() {
        let nan = SYDNEY_GKP_V1.replace("eta = 0.083", "eta = nan");
        assert!(matches!(DeviceSpec::from_toml_str(&nan), Err(DeviceError::Invalid { field: "eta", .. })));
        let neg = SYDNEY_GKP_V1.replace("omega_m = \"2pi*1.33M\"", "omega_m = -8.0e6");
        assert!(matches!(DeviceSpec::from_toml_str(&neg), Err(DeviceError::Invalid { field: "omega_m", .. })));
        let version = SYDNEY_GKP_V1.replace("format_version = 1", "format_version = 7");
        assert!(matches!(DeviceSpec::from_toml_str(&version), Err(DeviceError::Version(7))));
        let unknown = format!("bogus = 1\n{SYDNEY_GKP_V1}");
        assert!(matches!(DeviceSpec::from_toml_str(&unknown), Err(DeviceError::Parse(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_device("/nonexistent/dev.toml"), Err(DeviceError::Io { .. })));
    }

    #[test]
    fn resolves_effective_eta() {
        let d = sydney();
        assert_eq!(resolve_eta(&d, 0, 0).unwrap(), 0.083);
        let mut half = d.clone();
        half.participation = vec![vec![0.5, 1.0]];
        assert!((resolve_eta(&half, 0, 0).unwrap() - 0.0415).abs() < 1e-15);
        assert_eq!(resolve_eta(&half, 0, 0).unwrap(), half.participation[0][0] * half.eta);
        assert!(matches!(resolve_eta(&d, 3, 0), Err(DeviceError::OutOfRange { .. })));
        let r = d.resolve(0, 0).unwrap();
        assert_eq!(r.eta, 0.083);
    }

    #[test]
    fn ragged_participation_rejected() {
        let mut d = sydney();
        d.participation = vec![vec![1.0, 0.5], vec![0.3]];
        assert!(d.validate().is_err());
    }
}
