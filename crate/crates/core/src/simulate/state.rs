// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::FRAC_1_SQRT_2;

use super::SimulateError;
use crate::linalg::{c, fock_state, ComplexMatrix, ComplexVector, FockSpace};

/// Qubit outcome for post-selection. `Up` is the `|0⟩` (σ_z = +1) state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitOutcome {
    Up,
    Down,
}

impl QubitOutcome {
    pub fn index(self) -> usize {
        match self {
            QubitOutcome::Up => 0,
            QubitOutcome::Down => 1,
        }
    }
}

/// Pure joint state, qubit ⊗ oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    space: FockSpace,
    amplitudes: ComplexVector,
}

impl HybridState {
    pub fn new(space: FockSpace, amplitudes: ComplexVector) -> Result<Self, SimulateError> {
        if amplitudes.len() != space.joint_dim() {
            return Err(SimulateError::Dimension { expected: space.joint_dim(), got: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(SimulateError::NotNormalized(norm));
        }
        Ok(Self { space, amplitudes })
    }

    /// `qubit ⊗ oscillator`.
    pub fn product(
        space: FockSpace,
        qubit: [num_complex::Complex64; 2],
        oscillator: &ComplexVector,
    ) -> Result<Self, SimulateError> {
        let d = space.dim();
        if oscillator.len() != d {
            return Err(SimulateError::Dimension { expected: d, got: oscillator.len() });
        }
        let amps = ComplexVector::from_fn(2 * d, |i, _| qubit[i / d] * oscillator[i % d]);
        Self::new(space, amps)
    }

    /// `|+⟩ ⊗ |0⟩`.
    pub fn plus_vacuum(space: FockSpace) -> Self {
        let h = c(FRAC_1_SQRT_2, 0.0);
        Self::product(space, [h, h], &fock_state(space, 0)).expect("normalized by construction")
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    /// `U|ψ⟩`, renormalized to absorb round-off.
    pub fn apply_unitary(&self, u: &ComplexMatrix) -> Result<Self, SimulateError> {
        let n = self.amplitudes.len();
        if u.nrows() != n || u.ncols() != n {
            return Err(SimulateError::Dimension { expected: n, got: u.nrows() });
        }
        let out = u * &self.amplitudes;
        let norm = out.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(SimulateError::NotNormalized(norm));
        }
        Ok(Self { space: self.space, amplitudes: out.unscale(norm) })
    }

    /// Unnormalized oscillator amplitudes of one qubit branch.
    pub fn branch(&self, outcome: QubitOutcome) -> ComplexVector {
        let d = self.space.dim();
        self.amplitudes.rows(outcome.index() * d, d).into_owned()
    }

    /// `Tr_qubit |ψ⟩⟨ψ|`.
    pub fn reduced_oscillator(&self) -> ComplexMatrix {
        let up = self.branch(QubitOutcome::Up);
        let down = self.branch(QubitOutcome::Down);
        &up * up.adjoint() + &down * down.adjoint()
    }
}

/// Projects the qubit onto `outcome`; returns the renormalized oscillator
/// state and the Born probability.
pub fn postselect(state: &HybridState, outcome: QubitOutcome) -> Result<(ComplexVector, f64), SimulateError> {
    let branch = state.branch(outcome);
    let p = branch.norm_squared();
    if p <= 1e-12 {
        return Err(SimulateError::ZeroProbability(p));
    }
    Ok((branch.unscale(p.sqrt()), p))
}
