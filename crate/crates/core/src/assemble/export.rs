// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Schedule file formats.
//!
//! `artiq` writes a JSON document:
//!
//! ```text
//! { "format": "artiq-dax-like", "version": 1, "name", "device", "drive_scale_rad_s",
//!   "buffer_us", "entries": [ { "kind": "pulse", "gate", "model", "key", "t_start_us",
//!   "duration_us", "omega_L_rad_s", "channel_order": [..], "channels": { name: [..] } }
//!   | { "kind": "marker", "name", "qubit", "t_us" } ] }
//! ```
//!
//! `jaqal` writes line-oriented text, floats as `{:.16e}`:
//!
//! ```text
//! // jaqal-like pulse schedule
//! version 1
//! name <name>
//! device <json>
//! drive_scale <float>
//! buffer_us <float>
//! pulse <gate> <t_start_us> <duration_us> <omega_L>
//!   key <hex>
//!   target <json gate>
//!   param <json model>
//!   channel <name> <count>
//!     <float> <float> ...           (8 per line)
//! marker <name> <qubit> <t_us>
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::schedule::{Channel, Schedule, ScheduleEntry};
use super::AssembleError;
use crate::codebook::ModelSpec;
use crate::device::DeviceSpec;
use crate::gates::GateSpec;

pub const ARTIQ_FORMAT: &str = "artiq-dax-like";
pub const EXPORT_VERSION: u32 = 1;
const SAMPLES_PER_LINE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExportBackend {
    Artiq,
    Jaqal,
}

impl ExportBackend {
    pub const ALL: [ExportBackend; 2] = [ExportBackend::Artiq, ExportBackend::Jaqal];

    pub fn extension(self) -> &'static str {
        match self {
            ExportBackend::Artiq => "artiq.json",
            ExportBackend::Jaqal => "jaqal",
        }
    }
}

impl std::str::FromStr for ExportBackend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "artiq" | "dax" => Ok(ExportBackend::Artiq),
            "jaqal" | "jaqalpaw" => Ok(ExportBackend::Jaqal),
            other => Err(format!("unknown backend '{other}' (artiq, jaqal)")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ArtiqDoc {
    format: String,
    version: u32,
    name: String,
    device: DeviceSpec,
    drive_scale_rad_s: f64,
    buffer_us: f64,
    entries: Vec<ArtiqEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ArtiqEntry {
    Pulse {
        gate: GateSpec,
        model: ModelSpec,
        key: String,
        t_start_us: f64,
        duration_us: f64,
        #[serde(rename = "omega_L_rad_s")]
        omega_l_rad_s: f64,
        channel_order: Vec<String>,
        channels: BTreeMap<String, Vec<f64>>,
    },
    Marker {
        name: String,
        qubit: usize,
        t_us: f64,
    },
}

pub fn to_artiq_json(schedule: &Schedule) -> Result<String, AssembleError> {
    schedule.validate()?;
    let entries = schedule
        .entries
        .iter()
        .map(|e| match e {
            ScheduleEntry::Pulse { gate, model, key, t_start_us, duration_us, omega_l_rad_s, channels } => {
                ArtiqEntry::Pulse {
                    gate: gate.clone(),
                    model: model.clone(),
                    key: key.clone(),
                    t_start_us: *t_start_us,
                    duration_us: *duration_us,
                    omega_l_rad_s: *omega_l_rad_s,
                    channel_order: channels.iter().map(|c| c.name.clone()).collect(),
                    channels: channels.iter().map(|c| (c.name.clone(), c.samples.clone())).collect(),
                }
            }
            ScheduleEntry::Marker { name, qubit, t_us } => {
                ArtiqEntry::Marker { name: name.clone(), qubit: *qubit, t_us: *t_us }
            }
        })
        .collect();
    let doc = ArtiqDoc {
        format: ARTIQ_FORMAT.into(),
        version: EXPORT_VERSION,
        name: schedule.name.clone(),
        device: schedule.device.clone(),
        drive_scale_rad_s: schedule.drive_scale_rad_s,
        buffer_us: schedule.buffer_us,
        entries,
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| AssembleError::Format(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn parse_artiq_json(text: &str) -> Result<Schedule, AssembleError> {
    let doc: ArtiqDoc =
        serde_json::from_str(text).map_err(|e| AssembleError::Parse { line: 0, reason: e.to_string() })?;
    if doc.format != ARTIQ_FORMAT || doc.version != EXPORT_VERSION {
        return Err(AssembleError::Parse {
            line: 0,
            reason: format!("unsupported format {} v{}", doc.format, doc.version),
        });
    }
    let entries = doc
        .entries
        .into_iter()
        .map(|e| match e {
            ArtiqEntry::Pulse {
                gate,
                model,
                key,
                t_start_us,
                duration_us,
                omega_l_rad_s,
                channel_order,
                mut channels,
            } => {
                let chans = channel_order
                    .into_iter()
                    .map(|name| {
                        let samples = channels.remove(&name).ok_or_else(|| AssembleError::Parse {
                            line: 0,
                            reason: format!("missing channel {name}"),
                        })?;
                        Ok(Channel { name, samples })
                    })
                    .collect::<Result<Vec<_>, AssembleError>>()?;
                Ok(ScheduleEntry::Pulse { gate, model, key, t_start_us, duration_us, omega_l_rad_s, channels: chans })
            }
            ArtiqEntry::Marker { name, qubit, t_us } => Ok(ScheduleEntry::Marker { name, qubit, t_us }),
        })
        .collect::<Result<Vec<_>, AssembleError>>()?;
    let schedule = Schedule {
        name: doc.name,
        device: doc.device,
        drive_scale_rad_s: doc.drive_scale_rad_s,
        buffer_us: doc.buffer_us,
        entries,
    };
    schedule.validate()?;
    Ok(schedule)
}

fn fmt(x: f64) -> Result<String, AssembleError> {
    crate::codebook::format_float(x).map_err(|v| AssembleError::Format(format!("non-finite value {v}")))
}

fn json<T: Serialize>(value: &T) -> Result<String, AssembleError> {
    serde_json::to_string(value).map_err(|e| AssembleError::Format(e.to_string()))
}

pub fn to_jaqal_text(schedule: &Schedule) -> Result<String, AssembleError> {
    use std::fmt::Write;
    schedule.validate()?;
    if schedule.name.contains(char::is_whitespace) || schedule.name.is_empty() {
        return Err(AssembleError::Format(format!("schedule name '{}' must be one non-empty word", schedule.name)));
    }
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "// jaqal-like pulse schedule").ok();
    writeln!(w, "version {EXPORT_VERSION}").ok();
    writeln!(w, "name {}", schedule.name).ok();
    writeln!(w, "device {}", json(&schedule.device)?).ok();
    writeln!(w, "drive_scale {}", fmt(schedule.drive_scale_rad_s)?).ok();
    writeln!(w, "buffer_us {}", fmt(schedule.buffer_us)?).ok();
    for e in &schedule.entries {
        match e {
            ScheduleEntry::Pulse { gate, model, key, t_start_us, duration_us, omega_l_rad_s, channels } => {
                writeln!(
                    w,
                    "pulse {} {} {} {}",
                    gate.gate_type,
                    fmt(*t_start_us)?,
                    fmt(*duration_us)?,
                    fmt(*omega_l_rad_s)?
                )
                .ok();
                writeln!(w, "  key {key}").ok();
                writeln!(w, "  target {}", json(gate)?).ok();
                writeln!(w, "  param {}", json(model)?).ok();
                for ch in channels {
                    writeln!(w, "  channel {} {}", ch.name, ch.samples.len()).ok();
                    for chunk in ch.samples.chunks(SAMPLES_PER_LINE) {
                        let line = chunk.iter().map(|x| fmt(*x)).collect::<Result<Vec<_>, _>>()?.join(" ");
                        writeln!(w, "    {line}").ok();
                    }
                }
            }
            ScheduleEntry::Marker { name, qubit, t_us } => {
                writeln!(w, "marker {name} {qubit} {}", fmt(*t_us)?).ok();
            }
        }
    }
    Ok(out)
}

pub fn parse_jaqal_text(text: &str) -> Result<Schedule, AssembleError> {
    let err = |line: usize, reason: String| AssembleError::Parse { line, reason };
    let num = |line: usize, s: &str| s.parse::<f64>().map_err(|_| err(line, format!("bad number '{s}'")));
    let mut name = None;
    let mut device: Option<DeviceSpec> = None;
    let mut drive_scale = None;
    let mut buffer = None;
    let mut entries: Vec<ScheduleEntry> = Vec::new();
    // samples still expected for the last channel of the last pulse
    let mut pending = 0usize;
    let mut version_seen = false;

    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
        if pending > 0 {
            let Some(ScheduleEntry::Pulse { channels, .. }) = entries.last_mut() else {
                return Err(err(ln, "samples outside a pulse".into()));
            };
            let ch = channels.last_mut().expect("pending implies a channel");
            let tokens: Vec<&str> = line.split_whitespace().collect();
            pending = pending.checked_sub(tokens.len()).ok_or_else(|| err(ln, "too many samples".into()))?;
            for tok in tokens {
                ch.samples.push(num(ln, tok)?);
            }
            continue;
        }
        match head {
            "version" => {
                if rest != EXPORT_VERSION.to_string() {
                    return Err(err(ln, format!("unsupported version {rest}")));
                }
                version_seen = true;
            }
            "name" => name = Some(rest.to_string()),
            "device" => device = Some(serde_json::from_str(rest).map_err(|e| err(ln, e.to_string()))?),
            "drive_scale" => drive_scale = Some(num(ln, rest)?),
            "buffer_us" => buffer = Some(num(ln, rest)?),
            "pulse" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [gate_type, t, d, wl] = parts[..] else {
                    return Err(err(ln, "pulse needs <gate> <t_start> <duration> <omega_L>".into()));
                };
                entries.push(ScheduleEntry::Pulse {
                    gate: GateSpec::new(gate_type, Default::default()),
                    model: ModelSpec::default(),
                    key: String::new(),
                    t_start_us: num(ln, t)?,
                    duration_us: num(ln, d)?,
                    omega_l_rad_s: num(ln, wl)?,
                    channels: Vec::new(),
                });
            }
            "key" | "target" | "param" | "channel" => {
                let Some(ScheduleEntry::Pulse { gate, model, key, channels, .. }) = entries.last_mut() else {
                    return Err(err(ln, format!("'{head}' outside a pulse block")));
                };
                match head {
                    "key" => *key = rest.to_string(),
                    "target" => {
                        let parsed: GateSpec = serde_json::from_str(rest).map_err(|e| err(ln, e.to_string()))?;
                        if parsed.gate_type != gate.gate_type {
                            return Err(err(
                                ln,
                                format!("target {} inside {} pulse", parsed.gate_type, gate.gate_type),
                            ));
                        }
                        *gate = parsed;
                    }
                    "param" => *model = serde_json::from_str(rest).map_err(|e| err(ln, e.to_string()))?,
                    _ => {
                        let (ch_name, count) =
                            rest.split_once(' ').ok_or_else(|| err(ln, "channel needs <name> <count>".into()))?;
                        pending = count.trim().parse().map_err(|_| err(ln, format!("bad sample count '{count}'")))?;
                        channels.push(Channel { name: ch_name.to_string(), samples: Vec::with_capacity(pending) });
                    }
                }
            }
            "marker" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [m, q, t] = parts[..] else {
                    return Err(err(ln, "marker needs <name> <qubit> <t_us>".into()));
                };
                let qubit = q.parse().map_err(|_| err(ln, format!("bad qubit '{q}'")))?;
                entries.push(ScheduleEntry::Marker { name: m.to_string(), qubit, t_us: num(ln, t)? });
            }
            other => return Err(err(ln, format!("unknown directive '{other}'"))),
        }
    }
    if pending > 0 {
        return Err(err(text.lines().count(), format!("{pending} samples missing at end of file")));
    }
    if !version_seen {
        return Err(err(0, "missing version line".into()));
    }
    let schedule = Schedule {
        name: name.ok_or_else(|| err(0, "missing name".into()))?,
        device: device.ok_or_else(|| err(0, "missing device".into()))?,
        drive_scale_rad_s: drive_scale.ok_or_else(|| err(0, "missing drive_scale".into()))?,
        buffer_us: buffer.ok_or_else(|| err(0, "missing buffer_us".into()))?,
        entries,
    };
    schedule.validate()?;
    Ok(schedule)
}

pub fn render(schedule: &Schedule, backend: ExportBackend) -> Result<String, AssembleError> {
    match backend {
        ExportBackend::Artiq => to_artiq_json(schedule),
        ExportBackend::Jaqal => to_jaqal_text(schedule),
    }
}

pub fn parse(text: &str, backend: ExportBackend) -> Result<Schedule, AssembleError> {
    match backend {
        ExportBackend::Artiq => parse_artiq_json(text),
        ExportBackend::Jaqal => parse_jaqal_text(text),
    }
}

/// Writes `<out_dir>/<name>.<ext>` and returns its path.
pub fn write_schedule(schedule: &Schedule, out_dir: &Path, backend: ExportBackend) -> Result<PathBuf, AssembleError> {
    let body = render(schedule, backend)?;
    fs::create_dir_all(out_dir).map_err(|e| AssembleError::Io { path: out_dir.to_path_buf(), source: e })?;
    let path = out_dir.join(format!("{}.{}", schedule.name, backend.extension()));
    fs::write(&path, body).map_err(|e| AssembleError::Io { path: path.clone(), source: e })?;
    Ok(path)
}

pub fn read_schedule(path: &Path) -> Result<Schedule, AssembleError> {
    let text = fs::read_to_string(path).map_err(|e| AssembleError::Io { path: path.to_path_buf(), source: e })?;
    let backend = if path.to_string_lossy().ends_with(".json") { ExportBackend::Artiq } else { ExportBackend::Jaqal };
    parse(&text, backend)
}
