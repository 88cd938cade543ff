// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Motional dephasing as a random detuning `ε(t) a†a`, piecewise constant
//! over the pulse slots with `ε_k ~ N(0, 2γ/τ_seg)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SimulateError;
use crate::linalg::ComplexMatrix;
use crate::synth::{fidelity, propagate_with_detuning, ControlProblem, Waveforms};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Dephasing rate γ (Hz).
    pub gamma: f64,
    pub num_trajectories: usize,
    pub rng_seed: u64,
}

impl NoiseModel {
    pub fn new(gamma: f64, num_trajectories: usize, rng_seed: u64) -> Result<Self, SimulateError> {
        let model = Self { gamma, num_trajectories, rng_seed };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), SimulateError> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(SimulateError::Noise(format!("gamma must be finite and >= 0, got {}", self.gamma)));
        }
        if self.num_trajectories == 0 {
            return Err(SimulateError::Noise("need at least one trajectory".into()));
        }
        Ok(())
    }

    /// `σ² = 2γ/τ_seg`.
    pub fn variance(&self, seg_duration_s: f64) -> f64 {
        2.0 * self.gamma / seg_duration_s
    }

    /// Detuning samples for one trajectory. Each trajectory index reads its
    /// own ChaCha stream, so results do not depend on evaluation order.
    pub fn sample_epsilons(&self, num_slots: usize, seg_duration_s: f64, traj_index: u64) -> Vec<f64> {
        if self.gamma == 0.0 {
            return vec![0.0; num_slots];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(traj_index);
        let normal = Normal::new(0.0, self.variance(seg_duration_s).sqrt()).expect("finite positive std");
        (0..num_slots).map(|_| normal.sample(&mut rng)).collect()
    }
}

/// Propagator of one dephasing realization; `γ = 0` reproduces the
/// closed-system propagator bit for bit.
pub fn sample_dephasing_trajectory(
    problem: &ControlProblem,
    waveforms: &Waveforms,
    noise: &NoiseModel,
    traj_index: u64,
) -> Result<ComplexMatrix, SimulateError> {
    noise.validate()?;
    let eps = noise.sample_epsilons(problem.num_tslots, problem.dt(), traj_index);
    Ok(propagate_with_detuning(problem, waveforms, Some(&eps))?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoisyFidelity {
    pub mean: f64,
    /// Sample standard deviation; `None` for a single trajectory.
    pub std: Option<f64>,
    pub per_trajectory: Vec<f64>,
}

/// Pairwise summation, so the reduction does not depend on how trajectories
/// were batched.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Ensemble mean and spread of `F(U_target, U_traj)`.
pub fn noisy_fidelity(
    problem: &ControlProblem,
    waveforms: &Waveforms,
    noise: &NoiseModel,
) -> Result<NoisyFidelity, SimulateError> {
    noise.validate()?;
    let per: Vec<f64> = (0..noise.num_trajectories as u64)
        .map(|i| {
            let u = sample_dephasing_trajectory(problem, waveforms, noise, i)?;
            Ok(fidelity(&problem.u_target, &u)?)
        })
        .collect::<Result<_, SimulateError>>()?;
    let n = per.len() as f64;
    let mean = pairwise_sum(&per) / n;
    let std = (per.len() > 1).then(|| {
        let sq: Vec<f64> = per.iter().map(|f| (f - mean).powi(2)).collect();
        (pairwise_sum(&sq) / (n - 1.0)).sqrt()
    });
    Ok(NoisyFidelity { mean, std, per_trajectory: per })
}
