// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Canonical byte form of a (gate, device, model) request.
//!
//! Grammar (minified JSON subset, no whitespace anywhere):
//!
//! ```text
//! value  := object | array | string | int | float | "null"
//! object := "{" [ string ":" value { "," string ":" value } ] "}"   keys sorted bytewise
//! array  := "[" [ value { "," value } ] "]"                          order preserved
//! float  := d "." 16*d "e" ["-"] exp                                 17 significant digits
//! int    := decimal, no sign, no leading zeros
//! ```
//!
//! Floats are written as `{:.16e}` (e.g. `5.0000000000000000e-1`), which
//! round-trips every finite double bit-exactly. Negative zero is written as
//! positive zero. NaN and ±∞ are rejected.

use std::collections::BTreeMap;

use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codebook::ModelSpec;
use crate::device::DeviceSpec;
use crate::gates::{GateSpec, ParamValue};

/// Bumped whenever the canonical layout changes; part of every key.
pub const CANONICAL_SCHEMA: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CanonicalError {
    #[error("cannot canonicalize non-finite value {value} at {path}")]
    NonFinite { path: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Canon {
    Null,
    Bool(bool),
    Int(u64),
    Float(f64),
    Str(String),
    Array(Vec<Canon>),
    Object(BTreeMap<String, Canon>),
}

impl Canon {
    pub fn object<I, K>(entries: I) -> Canon
    where
        I: IntoIterator<Item = (K, Canon)>,
        K: Into<String>,
    {
        Canon::Object(entries.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CanonicalError> {
        let mut out = String::new();
        self.write(&mut out, "$")?;
        Ok(out.into_bytes())
    }

    fn write(&self, out: &mut String, path: &str) -> Result<(), CanonicalError> {
        match self {
            Canon::Null => out.push_str("null"),
            Canon::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Canon::Int(i) => out.push_str(&i.to_string()),
            Canon::Float(x) => out.push_str(
                &format_float(*x).map_err(|value| CanonicalError::NonFinite { path: path.to_string(), value })?,
            ),
            Canon::Str(s) => out.push_str(&serde_json::to_string(s).expect("strings always serialize")),
            Canon::Array(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write(out, &format!("{path}[{i}]"))?;
                }
                out.push(']');
            }
            Canon::Object(map) => {
                out.push('{');
                for (i, (k, v)) in map.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&serde_json::to_string(k).expect("strings always serialize"));
                    out.push(':');
                    v.write(out, &format!("{path}.{k}"))?;
                }
                out.push('}');
            }
        }
        Ok(())
    }

    /// Canonical view of an arbitrary JSON document. Integers stay integers;
    /// every other number is a float.
    pub fn from_json(value: &Value) -> Canon {
        match value {
            Value::Null => Canon::Null,
            Value::Bool(b) => Canon::Bool(*b),
            Value::Number(n) => match n.as_u64() {
                Some(u) => Canon::Int(u),
                None => Canon::Float(n.as_f64().unwrap_or(f64::NAN)),
            },
            Value::String(s) => Canon::Str(s.clone()),
            Value::Array(items) => Canon::Array(items.iter().map(Canon::from_json).collect()),
            Value::Object(map) => Canon::Object(map.iter().map(|(k, v)| (k.clone(), Canon::from_json(v))).collect()),
        }
    }
}

/// 17 significant digits in scientific notation; `Err` carries the offending
/// non-finite value.
pub fn format_float(x: f64) -> Result<String, f64> {
    if !x.is_finite() {
        return Err(x);
    }
    let x = if x == 0.0 { 0.0 } else { x };
    Ok(format!("{x:.16e}"))
}

fn float(x: f64) -> Canon {
    Canon::Float(x)
}

pub fn gate_canon(gate: &GateSpec) -> Canon {
    let params = gate.params.iter().map(|(k, v)| {
        let value = match v {
            ParamValue::Real(x) => float(*x),
            ParamValue::Complex([re, im]) => Canon::Array(vec![float(*re), float(*im)]),
        };
        (k.clone(), value)
    });
    Canon::object([
        ("type", Canon::Str(gate.gate_type.clone())),
        ("params", Canon::object(params)),
        ("qubit", Canon::Int(gate.qubit as u64)),
        ("qumode", Canon::Int(gate.qumode as u64)),
    ])
}

pub fn device_canon(device: &DeviceSpec) -> Canon {
    Canon::object([
        ("name", Canon::Str(device.name.clone())),
        ("eta", float(device.eta)),
        ("omega_m", float(device.omega_m)),
        ("omega_j", float(device.omega_j)),
        ("delta", float(device.delta)),
        ("omega_max", float(device.omega_max)),
        ("omega_q", device.omega_q.map(float).unwrap_or(Canon::Null)),
        (
            "participation",
            Canon::Array(
                device.participation.iter().map(|row| Canon::Array(row.iter().copied().map(float).collect())).collect(),
            ),
        ),
        ("coherence", Canon::object(device.coherence.iter().map(|(k, v)| (k.clone(), float(*v))))),
    ])
}

pub fn model_canon(model: &ModelSpec) -> Canon {
    Canon::object([
        ("n_max", Canon::Int(model.n_max as u64)),
        ("num_tslots", Canon::Int(model.num_tslots as u64)),
        ("duration_us", float(model.duration_us)),
        ("amp_bound", float(model.amp_bound)),
        ("fid_tol", float(model.fid_tol)),
        ("grad_tol", float(model.grad_tol)),
        ("max_iter", Canon::Int(model.max_iter as u64)),
        ("seed", Canon::Int(model.seed)),
    ])
}

/// Canonical bytes of a request triple. The gate must already be normalized
/// by its plugin.
pub fn canonical_serialize(gate: &GateSpec, device: &DeviceSpec, model: &ModelSpec) -> Result<Vec<u8>, CanonicalError> {
    Canon::object([
        ("schema", Canon::Int(CANONICAL_SCHEMA)),
        ("gate", gate_canon(gate)),
        ("device", device_canon(device)),
        ("model", model_canon(model)),
    ])
    .to_bytes()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `SHA-256(canonical_serialize(gate, device, model))` as lowercase hex.
pub fn request_hash(gate: &GateSpec, device: &DeviceSpec, model: &ModelSpec) -> Result<String, CanonicalError> {
    Ok(sha256_hex(&canonical_serialize(gate, device, model)?))
}
