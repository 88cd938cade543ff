// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

use super::{ControlProblem, SynthError, Waveforms};
use crate::gates::joint_number;
use crate::linalg::{trace, ComplexMatrix, HermitianEigen};

pub(crate) fn slot_hamiltonian(problem: &ControlProblem, u: &Waveforms, k: usize) -> ComplexMatrix {
    let mut h = problem.h_drift.clone();
    for (hc, w) in problem.h_controls.iter().zip(u) {
        if w[k] != 0.0 {
            h += hc * crate::linalg::c(w[k], 0.0);
        }
    }
    h
}

/// Per-slot propagators `exp(−i H_k dt)`.
pub fn slot_propagators(problem: &ControlProblem, u: &Waveforms) -> Result<Vec<ComplexMatrix>, SynthError> {
    problem.check_waveforms(u)?;
    let dt = problem.dt();
    Ok((0..problem.num_tslots).map(|k| HermitianEigen::new(&slot_hamiltonian(problem, u, k)).evolution(dt)).collect())
}

/// `U = U_{N−1} ⋯ U_1 U_0`.
pub fn propagate(problem: &ControlProblem, u: &Waveforms) -> Result<ComplexMatrix, SynthError> {
    propagate_with_detuning(problem, u, None)
}

/// Like [`propagate`], adding `ε_k · (I ⊗ a†a)` in slot `k`. Slots with
/// `ε_k == 0` take exactly the closed-system path.
pub fn propagate_with_detuning(
    problem: &ControlProblem,
    u: &Waveforms,
    eps: Option<&[f64]>,
) -> Result<ComplexMatrix, SynthError> {
    problem.check_waveforms(u)?;
    if let Some(eps) = eps {
        if eps.len() != problem.num_tslots {
            return Err(SynthError::Problem(format!(
                "{} detuning samples for {} slots",
                eps.len(),
                problem.num_tslots
            )));
        }
    }
    let number = eps.map(|_| joint_number(problem.space));
    let dt = problem.dt();
    let mut total = crate::linalg::identity(problem.dim());
    for k in 0..problem.num_tslots {
        let mut h = slot_hamiltonian(problem, u, k);
        if let (Some(eps), Some(n)) = (eps, number.as_ref()) {
            if eps[k] != 0.0 {
                h += n * crate::linalg::c(eps[k], 0.0);
            }
        }
        total = HermitianEigen::new(&h).evolution(dt) * total;
    }
    Ok(total)
}

/// `|Tr(W†U)|² / D²`.
pub fn fidelity(target: &ComplexMatrix, u: &ComplexMatrix) -> Result<f64, SynthError> {
    if target.shape() != u.shape() || !u.is_square() {
        return Err(SynthError::Dimension(target.nrows(), u.nrows()));
    }
    let d = u.nrows() as f64;
    let overlap = trace(&(target.adjoint() * u));
    Ok((overlap.norm_sqr() / (d * d)).min(1.0))
}
