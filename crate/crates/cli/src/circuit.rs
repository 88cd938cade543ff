// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Circuit files for `ionpulse export`.
//!
//! ```json
//! {
//!   "format": "ionpulse-circuit",
//!   "version": 1,
//!   "name": "squeezed_cat",
//!   "buffer_us": 1.0,
//!   "gates": [
//!     {"gate": "CS", "params": {"zeta": "0.5"}},
//!     {"ideal": "H", "qubit": 0},
//!     {"gate": "CD", "params": {"alpha": 1.7724538509055159}, "model": {"duration_us": 100}}
//!   ]
//! }
//! ```
//!
//! Parameter values are JSON numbers, `[re, im]` pairs or strings in the
//! `0.5+0.5j` grammar. A per-gate `model` overrides fields of the registry
//! default model for that gate type.

use std::collections::BTreeMap;
use std::path::Path;

use ionpulse_core::gates::ParamMap;
use ionpulse_core::units::parse_complex;
use ionpulse_core::{GateSpec, ModelSpec, ParamValue};
use serde::Deserialize;

use crate::error::CliError;

pub const CIRCUIT_FORMAT: &str = "ionpulse-circuit";
pub const CIRCUIT_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    pub format: String,
    pub version: u32,
    #[serde(default = "default_name")]
    pub name: String,
    pub buffer_us: Option<f64>,
    pub gates: Vec<CircuitOp>,
}

fn default_name() -> String {
    "circuit".into()
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum CircuitOp {
    Gate {
        gate: String,
        #[serde(default)]
        params: BTreeMap<String, RawParam>,
        #[serde(default)]
        qubit: usize,
        #[serde(default)]
        qumode: usize,
        model: Option<serde_json::Map<String, serde_json::Value>>,
    },
    Ideal {
        ideal: String,
        #[serde(default)]
        qubit: usize,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum RawParam {
    Number(f64),
    Pair([f64; 2]),
    Text(String),
}

impl RawParam {
    fn value(&self) -> Result<ParamValue, CliError> {
        Ok(match self {
            RawParam::Number(x) => ParamValue::Real(*x),
            RawParam::Pair(p) => ParamValue::Complex(*p),
            RawParam::Text(s) => {
                let z = parse_complex(s)?;
                if z.im == 0.0 && !s.contains(['j', 'i']) {
                    ParamValue::Real(z.re)
                } else {
                    ParamValue::complex(z)
                }
            }
        })
    }
}

impl CircuitFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        let file: CircuitFile = serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("malformed circuit file {}: {e}", path.display())))?;
        if file.format != CIRCUIT_FORMAT || file.version != CIRCUIT_VERSION {
            return Err(CliError::usage(format!(
                "unsupported circuit file {} v{} (expected {CIRCUIT_FORMAT} v{CIRCUIT_VERSION})",
                file.format, file.version
            )));
        }
        if file.gates.is_empty() {
            return Err(CliError::usage("circuit has no gates"));
        }
        Ok(file)
    }
}

/// Gate spec for one circuit entry; parameters are normalized later by the
/// registry.
pub fn gate_spec(
    gate: &str,
    params: &BTreeMap<String, RawParam>,
    qubit: usize,
    qumode: usize,
) -> Result<GateSpec, CliError> {
    let params: ParamMap = params.iter().map(|(k, v)| Ok((k.clone(), v.value()?))).collect::<Result<_, CliError>>()?;
    Ok(GateSpec::new(gate, params).on(qubit, qumode))
}

/// Applies a partial JSON model over `base`.
pub fn merge_model(
    base: &ModelSpec,
    overrides: &serde_json::Map<String, serde_json::Value>,
) -> Result<ModelSpec, CliError> {
    let mut value = serde_json::to_value(base).map_err(|e| CliError::usage(e.to_string()))?;
    let obj = value.as_object_mut().expect("ModelSpec serializes to an object");
    for (k, v) in overrides {
        obj.insert(k.clone(), v.clone());
    }
    serde_json::from_value(value).map_err(|e| CliError::usage(format!("bad model override: {e}")))
}
