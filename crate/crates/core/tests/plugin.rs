// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! A gate type defined outside the crate goes through the whole stack:
//! registry, synthesis, library, assembly, export and re-simulation.

use std::sync::Arc;

use ionpulse_core::assemble::{parse, render, simulate_schedule};
use ionpulse_core::codebook::CodebookError;
use ionpulse_core::gates::{GateError, ParamMap};
use ionpulse_core::linalg::{c, identity, kron, max_abs_diff, number, qubit_projector};
use ionpulse_core::synth::fidelity;
use ionpulse_core::{
    bundled_device, CircuitExporter, Codebook, ComplexMatrix, ControlProblem, DeviceSpec, Error, ExportBackend,
    GatePlugin, GateRegistry, GateSpec, ModelSpec, Waveforms,
};

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ (−1)^n`.
struct CParity;

impl GatePlugin for CParity {
    fn gate_type(&self) -> &str {
        "CParity"
    }

    fn validate_and_normalize(&self, params: &ParamMap) -> Result<ParamMap, GateError> {
        if let Some(name) = params.keys().next() {
            return Err(GateError::UnknownParam { gate: "CParity".into(), param: name.clone() });
        }
        Ok(ParamMap::new())
    }

    fn build_hamiltonian(
        &self,
        _gate: &GateSpec,
        device: &DeviceSpec,
        model: &ModelSpec,
    ) -> Result<ControlProblem, Error> {
        let space = model.space()?;
        let n = number(space);
        let g = device.eta * device.eta * device.omega_max / 2.0;
        let h = kron(&qubit_projector(1), &n) * c(g, 0.0);
        let parity = ComplexMatrix::from_fn(space.dim(), space.dim(), |i, j| match (i == j, i % 2) {
            (false, _) => c(0.0, 0.0),
            (true, 0) => c(1.0, 0.0),
            (true, _) => c(-1.0, 0.0),
        });
        let target = kron(&qubit_projector(0), &identity(space.dim())) + kron(&qubit_projector(1), &parity);
        let drift = ComplexMatrix::zeros(2 * space.dim(), 2 * space.dim());
        Ok(ControlProblem::new(drift, vec![h], vec!["Omega".into()], target, space, model)?)
    }

    /// Constant drive with area `π/g`.
    fn initial_guess(&self, problem: &ControlProblem, _gate: &GateSpec) -> Option<Waveforms> {
        let d = problem.space.dim();
        let g = problem.h_controls[0][(d + 1, d + 1)].re;
        let u = std::f64::consts::PI / (g * problem.duration_s);
        (u <= problem.amp_bound).then(|| vec![vec![u; problem.num_tslots]])
    }

    fn default_duration_us(&self) -> f64 {
        2000.0
    }
}

fn setup() -> (tempfile::TempDir, Arc<Codebook>, DeviceSpec) {
    let mut registry = GateRegistry::with_builtins();
    registry.register(Arc::new(CParity)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cb = Arc::new(Codebook::new(dir.path(), Arc::new(registry)));
    (dir, cb, bundled_device("sydney_gkp_v1").unwrap())
}

fn model() -> ModelSpec {
    ModelSpec { n_max: 7, num_tslots: 40, duration_us: 2000.0, ..ModelSpec::default() }
}

#[test]
fn custom_gate_synthesizes_and_caches() {
    let (_dir, cb, dev) = setup();
    let gate = GateSpec::new("CParity", ParamMap::new());
    let pulse = cb.synthesize(&gate, &dev, &model()).unwrap();
    assert!(pulse.converged && pulse.achieved_fidelity >= 0.999, "{}", pulse.achieved_fidelity);
    let problem = cb.problem_for(&pulse).unwrap();
    let u = ionpulse_core::propagate(&problem, &pulse.waveforms).unwrap();
    assert!((fidelity(&problem.u_target, &u).unwrap() - pulse.achieved_fidelity).abs() < 1e-12);
    assert_eq!(cb.lookup(&gate, &dev, &model()).unwrap().unwrap(), pulse);
    assert_eq!(cb.registry().default_model("CParity").unwrap().duration_us, 2000.0);
}

#[test]
fn custom_gate_rejects_parameters_and_unknown_types_list_registry() {
    let (_dir, cb, dev) = setup();
    let mut params = ParamMap::new();
    params.insert("phi".into(), ionpulse_core::ParamValue::Real(1.0));
    let err = cb.synthesize(&GateSpec::new("CParity", params), &dev, &model()).unwrap_err();
    assert!(matches!(err, Error::Gate(GateError::UnknownParam { .. })), "{err}");
    let err = cb.synthesize(&GateSpec::new("SNAP", ParamMap::new()), &dev, &model()).unwrap_err();
    assert!(err.to_string().contains("CParity"), "{err}");
    let mut reg = GateRegistry::with_builtins();
    reg.register(Arc::new(CParity)).unwrap();
    assert!(reg.register(Arc::new(CParity)).is_err());
}

#[test]
fn custom_gate_assembles_exports_and_resimulates() {
    let (_dir, cb, dev) = setup();
    let mut ex = CircuitExporter::new(Arc::clone(&cb), dev).named("parity").with_model(model());
    let cd = ex.add_cd(c(0.3, 0.0)).unwrap();
    ex.add_hadamard(0).unwrap();
    let cp = ex.add_gate(GateSpec::new("CParity", ParamMap::new())).unwrap();
    let schedule = ex.assemble().unwrap();
    for backend in ExportBackend::ALL {
        let text = render(&schedule, backend).unwrap();
        assert_eq!(parse(&text, backend).unwrap(), schedule);
    }
    let u = simulate_schedule(&schedule, cb.registry()).unwrap();
    let h = ionpulse_core::assemble::ideal_gate_unitary("H", model().space().unwrap()).unwrap();
    let want = cp.unitary().unwrap().as_ref() * h * cd.unitary().unwrap().as_ref();
    assert!(max_abs_diff(&u, &want) < 1e-9);
    let err = cb
        .compile_pulse(
            &GateSpec::new("CParity", ParamMap::new()),
            cp.device(),
            &ModelSpec { seed: 1, ..model() },
            ionpulse_core::Strategy::Lookup,
        )
        .unwrap_err();
    assert!(matches!(err, Error::Codebook(CodebookError::Miss { .. })));
}
