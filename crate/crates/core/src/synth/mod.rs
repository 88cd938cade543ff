// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise-constant pulse synthesis.
//!
//! A [`ControlProblem`] is `H(t) = H_d + Σ_c u_c(t) H_c` with dimensionless
//! controls `u_c` held constant over `num_tslots` equal slots and bounded by
//! `amp_bound`. [`grape_optimize`] maximizes the phase-insensitive gate
//! fidelity `|Tr(W†U)|² / D²` with exact gradients.

mod grape;
pub mod hamiltonian;
mod propagate;
mod sweep;

use thiserror::Error;

use crate::codebook::ModelSpec;
use crate::linalg::{is_hermitian, unitarity_error, ComplexMatrix, FockSpace, HermitianEigen, LinalgError};

pub use grape::{fidelity_and_gradient, grape_optimize, initial_waveforms, GrapeOutcome, StopReason};
pub use hamiltonian::{build_hamiltonian_cd, build_hamiltonian_cr, build_hamiltonian_cs};
pub use propagate::{fidelity, propagate, propagate_with_detuning, slot_propagators};
pub use sweep::{duration_sweep, SweepPoint};

/// `waveforms[channel][slot]`.
pub type Waveforms = Vec<Vec<f64>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid control problem: {0}")]
    Problem(String),
    #[error("waveforms have shape {got_channels}x{got_slots}, expected {channels}x{slots}")]
    Shape { channels: usize, slots: usize, got_channels: usize, got_slots: usize },
    #[error("control sample {value} on channel {channel}, slot {slot} exceeds bound {bound}")]
    OutOfBounds { channel: usize, slot: usize, value: f64, bound: f64 },
    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    Dimension(usize, usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone)]
pub struct ControlProblem {
    pub space: FockSpace,
    /// rad/s.
    pub h_drift: ComplexMatrix,
    /// rad/s per unit control amplitude.
    pub h_controls: Vec<ComplexMatrix>,
    pub channels: Vec<String>,
    pub u_target: ComplexMatrix,
    pub duration_s: f64,
    pub num_tslots: usize,
    pub amp_bound: f64,
    pub fid_tol: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl ControlProblem {
    /// Checks Hermiticity, unitarity of the target and shapes.
    pub fn new(
        h_drift: ComplexMatrix,
        h_controls: Vec<ComplexMatrix>,
        channels: Vec<String>,
        u_target: ComplexMatrix,
        space: FockSpace,
        model: &ModelSpec,
    ) -> Result<Self, SynthError> {
        let problem = Self {
            space,
            h_drift,
            h_controls,
            channels,
            u_target,
            duration_s: model.duration_s(),
            num_tslots: model.num_tslots,
            amp_bound: model.amp_bound,
            fid_tol: model.fid_tol,
            grad_tol: model.grad_tol,
            max_iter: model.max_iter,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Problem(m));
        let d = self.dim();
        if self.h_controls.is_empty() || self.h_controls.len() != self.channels.len() {
            return bad(format!("{} controls for {} channel names", self.h_controls.len(), self.channels.len()));
        }
        for (name, h) in std::iter::once(("drift", &self.h_drift))
            .chain(self.channels.iter().map(String::as_str).zip(&self.h_controls))
        {
            if h.nrows() != d || h.ncols() != d {
                return Err(SynthError::Dimension(d, h.nrows()));
            }
            let scale = crate::linalg::max_abs(h).max(1.0);
            if !is_hermitian(h, 1e-12 * scale) {
                return bad(format!("{name} Hamiltonian is not Hermitian"));
            }
        }
        if self.u_target.nrows() != d || self.u_target.ncols() != d {
            return Err(SynthError::Dimension(d, self.u_target.nrows()));
        }
        if unitarity_error(&self.u_target) > 1e-9 {
            return bad("target is not unitary".into());
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) || self.num_tslots == 0 {
            return bad(format!("duration {} s over {} slots", self.duration_s, self.num_tslots));
        }
        if !(self.amp_bound.is_finite() && self.amp_bound > 0.0) {
            return bad(format!("amp_bound {}", self.amp_bound));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.space.joint_dim()
    }

    pub fn num_controls(&self) -> usize {
        self.h_controls.len()
    }

    pub fn dt(&self) -> f64 {
        self.duration_s / self.num_tslots as f64
    }

    /// `exp(+i H_d T)`: maps a propagator from the rotating drift frame
    /// back onto the bare gate.
    pub fn drift_frame_inverse(&self) -> ComplexMatrix {
        HermitianEigen::new(&self.h_drift).evolution(-self.duration_s)
    }

    /// Checks shape and bounds of a waveform set for this problem.
    pub fn check_waveforms(&self, u: &Waveforms) -> Result<(), SynthError> {
        let got_slots = u.first().map(Vec::len).unwrap_or(0);
        if u.len() != self.num_controls() || u.iter().any(|w| w.len() != self.num_tslots) {
            return Err(SynthError::Shape {
                channels: self.num_controls(),
                slots: self.num_tslots,
                got_channels: u.len(),
                got_slots,
            });
        }
        let bound = self.amp_bound * (1.0 + 1e-12);
        for (channel, w) in u.iter().enumerate() {
            for (slot, &value) in w.iter().enumerate() {
                if !value.is_finite() || value.abs() > bound {
                    return Err(SynthError::OutOfBounds { channel, slot, value, bound: self.amp_bound });
                }
            }
        }
        Ok(())
    }
}
