// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Spin-motion control Hamiltonians for the built-in gates.
//!
//! All three are interaction-frame sideband models with full-scale Rabi rate
//! `Ω = device.omega_max` and effective Lamb-Dicke parameter `η`:
//!
//! | gate | controls                                                   | drift     |
//! |------|------------------------------------------------------------|-----------|
//! | CD   | `(ηΩ/2) σ_x ⊗ (a + a†)`, `(ηΩ/2) σ_x ⊗ i(a† − a)`          | `Δ a†a`   |
//! | CR   | `(η²Ω/2) σ_z ⊗ a†a`                                        | none      |
//! | CS   | `(η²Ω/4) σ_x ⊗ (a² + a†²)`, `(η²Ω/4) σ_x ⊗ i(a†² − a²)`    | `Δ a†a`   |
//!
//! The detuning `Δ` rotates phase space during the gate, so the optimizer
//! target is `exp(−i H_d T) U_gate`.

use num_complex::Complex64;

use super::{ControlProblem, Waveforms};
use crate::codebook::ModelSpec;
use crate::device::{resolve_eta, DeviceSpec};
use crate::gates::{joint_number, target_unitary_cd, target_unitary_cr, target_unitary_cs, GateSpec};
use crate::linalg::{annihilation, c, kron, sigma_x, sigma_z, ComplexMatrix, HermitianEigen, I};
use crate::Error;

pub const CHANNEL_X: &str = "Omega_x";
pub const CHANNEL_P: &str = "Omega_p";
pub const CHANNEL_SINGLE: &str = "Omega";

fn prelude(gate: &GateSpec, device: &DeviceSpec, model: &ModelSpec) -> Result<(crate::linalg::FockSpace, f64), Error> {
    model.validate()?;
    device.validate()?;
    let eta = resolve_eta(device, gate.qubit, gate.qumode)?;
    Ok((model.space()?, eta))
}

fn in_drift_frame(h_drift: &ComplexMatrix, gate_unitary: ComplexMatrix, duration_s: f64) -> ComplexMatrix {
    HermitianEigen::new(h_drift).evolution(duration_s) * gate_unitary
}

/// First red/blue sideband pair: controlled displacement.
pub fn build_hamiltonian_cd(gate: &GateSpec, device: &DeviceSpec, model: &ModelSpec) -> Result<ControlProblem, Error> {
    let (space, eta) = prelude(gate, device, model)?;
    let alpha = gate.complex("alpha")?;
    let g = c(eta * device.omega_max / 2.0, 0.0);
    let a = annihilation(space);
    let ad = a.adjoint();
    let sx = sigma_x();
    let h_x = kron(&sx, &(&a + &ad)) * g;
    let h_p = kron(&sx, &((&ad - &a) * I)) * g;
    let h_d = joint_number(space) * c(device.delta, 0.0);
    let target = in_drift_frame(&h_d, target_unitary_cd(alpha, space)?, model.duration_s());
    Ok(ControlProblem::new(h_d, vec![h_x, h_p], vec![CHANNEL_X.into(), CHANNEL_P.into()], target, space, model)?)
}

/// Dispersive spin-dependent rotation; no drift.
pub fn build_hamiltonian_cr(gate: &GateSpec, device: &DeviceSpec, model: &ModelSpec) -> Result<ControlProblem, Error> {
    let (space, eta) = prelude(gate, device, model)?;
    let theta = gate.real("theta")?;
    let g = c(eta * eta * device.omega_max / 2.0, 0.0);
    let d = space.joint_dim();
    let h = kron(&sigma_z(), &crate::linalg::number(space)) * g;
    let target = target_unitary_cr(theta, space)?;
    Ok(ControlProblem::new(ComplexMatrix::zeros(d, d), vec![h], vec![CHANNEL_SINGLE.into()], target, space, model)?)
}

/// Second sideband pair: controlled squeezing.
pub fn build_hamiltonian_cs(gate: &GateSpec, device: &DeviceSpec, model: &ModelSpec) -> Result<ControlProblem, Error> {
    let (space, eta) = prelude(gate, device, model)?;
    let zeta = gate.complex("zeta")?;
    let g = c(eta * eta * device.omega_max / 4.0, 0.0);
    let a = annihilation(space);
    let a2 = &a * &a;
    let ad2 = a2.adjoint();
    let sx = sigma_x();
    let h_x = kron(&sx, &(&a2 + &ad2)) * g;
    let h_p = kron(&sx, &((&ad2 - &a2) * I)) * g;
    let h_d = joint_number(space) * c(device.delta, 0.0);
    let target = in_drift_frame(&h_d, target_unitary_cs(zeta, space)?, model.duration_s());
    Ok(ControlProblem::new(h_d, vec![h_x, h_p], vec![CHANNEL_X.into(), CHANNEL_P.into()], target, space, model)?)
}

/// Coupling prefactor read back from one matrix element of the first
/// control, rad/s per unit amplitude.
fn prefactor(problem: &ControlProblem, row: usize, col: usize, element: f64) -> f64 {
    problem.h_controls[0][(row, col)].norm() / element
}

fn slot_centres(problem: &ControlProblem) -> impl Iterator<Item = f64> + '_ {
    let dt = problem.dt();
    (0..problem.num_tslots).map(move |k| (k as f64 + 0.5) * dt)
}

/// Detuning read back from the drift (`H_d = Δ I ⊗ a†a`).
fn drift_detuning(problem: &ControlProblem) -> f64 {
    let d = problem.space.dim();
    if d > 1 {
        problem.h_drift[(1, 1)].re
    } else {
        0.0
    }
}

fn split(samples: impl Iterator<Item = Complex64>) -> Waveforms {
    let (re, im): (Vec<f64>, Vec<f64>) = samples.map(|z| (z.re, z.im)).unzip();
    vec![re, im]
}

/// Counter-rotating constant-area drive: `w(t) = iα/(gT) · e^{−iΔt}` with
/// `w = u_x + i u_p`. Exact for a continuous drive, so only the slot
/// discretization is left for the optimizer.
pub fn cd_initial_guess(problem: &ControlProblem, alpha: Complex64) -> Option<Waveforms> {
    if problem.num_controls() != 2 {
        return None;
    }
    // ⟨↓,0| σ_x ⊗ (a + a†) |↑,1⟩ = 1
    let g = prefactor(problem, 0, problem.space.dim() + 1, 1.0);
    if g == 0.0 {
        return None;
    }
    let delta = drift_detuning(problem);
    let w0 = I * alpha / (g * problem.duration_s);
    Some(split(slot_centres(problem).map(|t| w0 * Complex64::from_polar(1.0, -delta * t))))
}

/// Constant drive with `θ = g u T`.
pub fn cr_initial_guess(problem: &ControlProblem, theta: f64) -> Option<Waveforms> {
    if problem.num_controls() != 1 {
        return None;
    }
    let g = prefactor(problem, 1, 1, 1.0);
    if g == 0.0 {
        return None;
    }
    let u = theta / (g * problem.duration_s);
    Some(vec![vec![u; problem.num_tslots]])
}

/// `w(t) = −iζ/(2gT) · e^{−2iΔt}`.
pub fn cs_initial_guess(problem: &ControlProblem, zeta: Complex64) -> Option<Waveforms> {
    if problem.num_controls() != 2 || problem.space.dim() < 3 {
        return None;
    }
    // ⟨↓,0| σ_x ⊗ (a² + a†²) |↑,2⟩ = √2
    let g = prefactor(problem, 0, problem.space.dim() + 2, std::f64::consts::SQRT_2);
    if g == 0.0 {
        return None;
    }
    let delta = drift_detuning(problem);
    let w0 = -I * zeta / (2.0 * g * problem.duration_s);
    Some(split(slot_centres(problem).map(|t| w0 * Complex64::from_polar(1.0, -2.0 * delta * t))))
}
