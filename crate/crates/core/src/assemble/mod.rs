// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Online assembly: lazy gate handles, schedules and their export formats.

mod compiled;
mod export;
mod schedule;

use std::path::PathBuf;

use thiserror::Error;

pub use compiled::{CompiledGate, MatchMode};
pub use export::{
    parse, parse_artiq_json, parse_jaqal_text, read_schedule, render, to_artiq_json, to_jaqal_text, write_schedule,
    ExportBackend, ARTIQ_FORMAT, EXPORT_VERSION,
};
pub use schedule::{
    ideal_gate_unitary, laser_frequency, simulate_schedule, Channel, CircuitExporter, Schedule, ScheduleEntry,
    DEFAULT_BUFFER_US,
};

#[derive(Debug, Error)]
pub enum AssembleError {
    #[error("circuit is empty")]
    Empty,
    #[error("inter-gate buffer must be positive, got {0} µs")]
    Buffer(f64),
    #[error(
        "device '{0}' has no qubit frequency omega_q; add `omega_q = \"2pi*<Hz>\"` to the calibration file to export"
    )]
    MissingQubitFrequency(String),
    #[error("gate {index} could not be resolved: {source}")]
    Gate { index: usize, source: Box<crate::Error> },
    #[error("entry {index}: {reason}")]
    Timing { index: usize, reason: String },
    #[error("entry {index}, channel {channel}: sample {value} exceeds the device drive limit")]
    Amplitude { index: usize, channel: String, value: f64 },
    #[error("unknown ideal gate '{0}' (known: H, X, Z)")]
    UnknownMarker(String),
    #[error("a schedule cannot start with an ideal gate marker when simulated")]
    LeadingMarker,
    #[error("schedule mixes oscillator truncations")]
    MixedSpaces,
    #[error("cannot format schedule: {0}")]
    Format(String),
    #[error("schedule parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("schedule I/O on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::codebook::{Codebook, ModelSpec};
    use crate::device::{bundled_device, DeviceSpec};
    use crate::gates::GateRegistry;
    use crate::linalg::{c, max_abs_diff};

    fn model() -> ModelSpec {
        ModelSpec { n_max: 4, num_tslots: 20, duration_us: 300.0, ..ModelSpec::default() }
    }

    fn setup() -> (tempfile::TempDir, Arc<Codebook>, DeviceSpec) {
        let dir = tempfile::tempdir().unwrap();
        let cb = Arc::new(Codebook::new(dir.path(), Arc::new(GateRegistry::with_builtins())));
        (dir, cb, bundled_device("sydney_gkp_v1").unwrap())
    }

    fn circuit(cb: &Arc<Codebook>, dev: &DeviceSpec) -> (CircuitExporter, Vec<Arc<CompiledGate>>) {
        let mut ex = CircuitExporter::new(Arc::clone(cb), dev.clone()).named("demo").with_model(model());
        let a = ex.add_cd(c(0.4, 0.1)).unwrap();
        ex.add_hadamard(0).unwrap();
        let b = ex.add_cr(0.382).unwrap();
        let d = ex.add_cd(c(-0.2, 0.0)).unwrap();
        (ex, vec![a, b, d])
    }

    #[test]
    fn laser_frequency_formula() {
        let dev = bundled_device("sydney_gkp_v1").unwrap();
        let want = dev.omega_q.unwrap() - dev.omega_m + dev.delta;
        assert_eq!(laser_frequency(&dev).unwrap(), want);
        let bare = DeviceSpec { omega_q: None, ..dev };
        let err = laser_frequency(&bare).unwrap_err();
        assert!(err.to_string().contains("omega_q"));
    }

    #[test]
    fn entries_are_separated_by_the_buffer() {
        let (_dir, cb, dev) = setup();
        let (ex, _) = circuit(&cb, &dev);
        let s = ex.with_buffer_us(2.5).assemble().unwrap();
        let starts: Vec<f64> = s.entries.iter().map(ScheduleEntry::start_us).collect();
        assert_eq!(starts, vec![0.0, 302.5, 305.0, 607.5]);
        assert_eq!(s.total_duration_us(), 3.0 * 300.0 + 3.0 * 2.5);
        assert_eq!(s.num_pulses(), 3);
    }

    #[test]
    fn stitched_simulation_equals_gate_product() {
        let (_dir, cb, dev) = setup();
        let (ex, gates) = circuit(&cb, &dev);
        let s = ex.assemble().unwrap();
        let u = simulate_schedule(&s, cb.registry()).unwrap();
        let space = model().space().unwrap();
        let h = ideal_gate_unitary("H", space).unwrap();
        let want = gates[2].unitary().unwrap().as_ref()
            * gates[1].unitary().unwrap().as_ref()
            * h
            * gates[0].unitary().unwrap().as_ref();
        assert!(max_abs_diff(&u, &want) < 1e-9);
        assert_eq!(gates[0].propagations(), 1);
        gates[0].unitary().unwrap();
        assert_eq!(gates[0].propagations(), 1);
    }

    #[test]
    fn warm_cache_assembles_without_synthesis() {
        let (_dir, cb, dev) = setup();
        circuit(&cb, &dev).0.assemble().unwrap();
        let before = cb.stats().syntheses;
        assert_eq!(before, 3);
        let (ex, gates) = circuit(&cb, &dev);
        assert!(!gates[0].is_resolved());
        ex.assemble().unwrap();
        assert_eq!(cb.stats().syntheses, before);
        assert!(gates.iter().all(|g| g.is_resolved()));
    }

    #[test]
    fn exports_are_deterministic_and_parse_back() {
        let (dir, cb, dev) = setup();
        let s = circuit(&cb, &dev).0.assemble().unwrap();
        for backend in ExportBackend::ALL {
            let a = render(&s, backend).unwrap();
            assert_eq!(a, render(&s, backend).unwrap());
            assert_eq!(parse(&a, backend).unwrap(), s, "{backend:?}");
        }
        let out = dir.path().join("out");
        let (ex, _) = circuit(&cb, &dev);
        let first = ex.export(&out, &ExportBackend::ALL).unwrap();
        let bytes: Vec<Vec<u8>> = first.iter().map(|p| std::fs::read(p).unwrap()).collect();
        let again = ex.export(&out, &ExportBackend::ALL).unwrap();
        assert_eq!(first, again);
        for (p, b) in again.iter().zip(&bytes) {
            assert_eq!(&std::fs::read(p).unwrap(), b);
            assert_eq!(read_schedule(p).unwrap(), s);
        }
        assert!(first[0].ends_with("demo.artiq.json") && first[1].ends_with("demo.jaqal"));
    }

    #[test]
    fn invalid_circuits_are_rejected() {
        let (_dir, cb, dev) = setup();
        let empty = CircuitExporter::new(Arc::clone(&cb), dev.clone());
        assert!(matches!(empty.assemble(), Err(crate::Error::Assemble(AssembleError::Empty))));
        let (ex, _) = circuit(&cb, &dev);
        assert!(matches!(ex.with_buffer_us(0.0).assemble(), Err(crate::Error::Assemble(AssembleError::Buffer(_)))));
        let mut ex = CircuitExporter::new(Arc::clone(&cb), dev.clone());
        assert!(ex.add_ideal("T", 0).is_err());

        let mut s = circuit(&cb, &dev).0.assemble().unwrap();
        if let ScheduleEntry::Pulse { channels, .. } = &mut s.entries[0] {
            channels[0].samples[0] = 1.5;
        }
        assert!(matches!(s.validate(), Err(AssembleError::Amplitude { index: 0, .. })));
        let mut s = circuit(&cb, &dev).0.assemble().unwrap();
        s.entries.swap(0, 2);
        assert!(matches!(s.validate(), Err(AssembleError::Timing { .. })));
        s.entries.remove(0);
        s.entries.remove(0);
        s.entries.insert(0, ScheduleEntry::Marker { name: "H".into(), qubit: 0, t_us: -1.0 });
        assert!(s.validate().is_ok());
        assert!(matches!(
            simulate_schedule(&s, cb.registry()),
            Err(crate::Error::Assemble(AssembleError::LeadingMarker))
        ));
    }

    #[test]
    fn malformed_exports_report_lines() {
        let err = parse_jaqal_text("// x\nversion 2\n").unwrap_err();
        assert!(matches!(err, AssembleError::Parse { line: 2, .. }), "{err}");
        assert!(parse_artiq_json("{}").is_err());
    }
}
