// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Squeezed cat preparation: `CS(ζ)` on `|+⟩|0⟩`, an ideal Hadamard on the
//! qubit, `CD(α)`, then post-selection of the qubit on `|↑⟩`. Ideally the
//! oscillator ends in `(D(α) + D(−α)) S(ζ)|0⟩`, normalized.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::noise::{pairwise_sum, NoiseModel};
use super::state::{postselect, HybridState, QubitOutcome};
use super::wigner::{negativity, wigner, wigner_pure, GridSpec, WignerGrid};
use super::SimulateError;
use crate::codebook::{Codebook, ModelSpec, PulseSpec, Strategy};
use crate::device::DeviceSpec;
use crate::gates::{GateSpec, CD, CS};
use crate::linalg::{
    c, displacement, fock_state, hadamard, identity, kron, squeezing, ComplexMatrix, ComplexVector, FockSpace,
};
use crate::synth::{propagate, propagate_with_detuning, ControlProblem};
use crate::Error;

#[derive(Debug, Clone)]
pub struct CatConfig {
    pub alpha: Complex64,
    pub zeta: Complex64,
    pub grid: GridSpec,
    /// Dephasing applied during both pulses; `None` for closed evolution.
    pub noise: Option<NoiseModel>,
    pub strategy: Strategy,
}

impl Default for CatConfig {
    fn default() -> Self {
        Self {
            alpha: c(PI.sqrt(), 0.0),
            zeta: c(0.5, 0.0),
            grid: GridSpec::default(),
            noise: None,
            strategy: Strategy::Hybrid,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CatMetrics {
    pub negativity: f64,
    pub p_up: f64,
    /// Overlap of the post-selected state with the ideal cat (for noisy runs,
    /// `⟨cat|ρ|cat⟩`).
    pub ideal_overlap: f64,
    pub cs_key: String,
    pub cd_key: String,
    pub cs_fidelity: f64,
    pub cd_fidelity: f64,
    /// Optimizer runs triggered while resolving the two pulses.
    pub syntheses: usize,
    pub trajectories: usize,
}

#[derive(Debug, Clone)]
pub struct CatRun {
    /// `after_cs`, `after_cd` (qubit traced out) and `cat` (post-selected).
    pub stages: Vec<(String, WignerGrid)>,
    /// Post-selected oscillator density matrix.
    pub cat_state: ComplexMatrix,
    pub metrics: CatMetrics,
}

/// Normalized `(D(α) + D(−α)) S(ζ)|0⟩`.
pub fn ideal_cat_state(alpha: Complex64, zeta: Complex64, space: FockSpace) -> Result<ComplexVector, Error> {
    let sq = squeezing(zeta, space)? * fock_state(space, 0);
    let psi = (displacement(alpha, space)? + displacement(-alpha, space)?) * sq;
    let n = psi.norm();
    Ok(psi.unscale(n))
}

/// Pulse propagator mapped out of its drift frame, so it acts as the bare
/// gate.
fn gate_frame(problem: &ControlProblem, u: ComplexMatrix) -> ComplexMatrix {
    problem.drift_frame_inverse() * u
}

fn resolve(
    codebook: &Codebook,
    gate: GateSpec,
    device: &DeviceSpec,
    model: &ModelSpec,
    strategy: Strategy,
) -> Result<(PulseSpec, ControlProblem), Error> {
    let pulse = codebook.compile_pulse(&gate, device, model, strategy)?;
    let problem = codebook.problem_for(&pulse)?;
    Ok((pulse, problem))
}

/// Runs the circuit from cached (or freshly synthesized) CS and CD pulses.
pub fn run_cat_circuit(
    codebook: &Codebook,
    device: &DeviceSpec,
    cs_model: &ModelSpec,
    cd_model: &ModelSpec,
    config: &CatConfig,
) -> Result<CatRun, Error> {
    if cs_model.n_max != cd_model.n_max {
        return Err(SimulateError::Dimension { expected: cs_model.n_max + 1, got: cd_model.n_max + 1 }.into());
    }
    let before = codebook.stats().syntheses;
    let (cs_pulse, cs_problem) = resolve(codebook, GateSpec::cs(config.zeta)?, device, cs_model, config.strategy)?;
    let (cd_pulse, cd_problem) = resolve(codebook, GateSpec::cd(config.alpha)?, device, cd_model, config.strategy)?;
    let syntheses = codebook.stats().syntheses - before;
    let space = cs_problem.space;
    let h_qubit = kron(&hadamard(), &identity(space.dim()));
    let start = HybridState::plus_vacuum(space);
    let target = ideal_cat_state(config.alpha, config.zeta, space)?;

    let (after_cs, after_cd, cat_rho, p_up, trajectories) = match &config.noise {
        None => {
            let u_cs = gate_frame(&cs_problem, propagate(&cs_problem, &cs_pulse.waveforms)?);
            let u_cd = gate_frame(&cd_problem, propagate(&cd_problem, &cd_pulse.waveforms)?);
            let s1 = start.apply_unitary(&u_cs)?;
            let s3 = s1.apply_unitary(&h_qubit)?.apply_unitary(&u_cd)?;
            let (cat, p) = postselect(&s3, QubitOutcome::Up)?;
            (s1.reduced_oscillator(), s3.reduced_oscillator(), &cat * cat.adjoint(), p, 0)
        }
        Some(noise) => {
            noise.validate()?;
            let d = space.dim();
            let mut rho_cs = ComplexMatrix::zeros(d, d);
            let mut rho_cd = ComplexMatrix::zeros(d, d);
            let mut rho_cat = ComplexMatrix::zeros(d, d);
            let mut probs = Vec::with_capacity(noise.num_trajectories);
            for i in 0..noise.num_trajectories as u64 {
                // independent streams for the two pulses of one trajectory
                let eps_cs = noise.sample_epsilons(cs_problem.num_tslots, cs_problem.dt(), 2 * i);
                let eps_cd = noise.sample_epsilons(cd_problem.num_tslots, cd_problem.dt(), 2 * i + 1);
                let u_cs =
                    gate_frame(&cs_problem, propagate_with_detuning(&cs_problem, &cs_pulse.waveforms, Some(&eps_cs))?);
                let u_cd =
                    gate_frame(&cd_problem, propagate_with_detuning(&cd_problem, &cd_pulse.waveforms, Some(&eps_cd))?);
                let s1 = start.apply_unitary(&u_cs)?;
                let s3 = s1.apply_unitary(&h_qubit)?.apply_unitary(&u_cd)?;
                let up = s3.branch(QubitOutcome::Up);
                rho_cs += s1.reduced_oscillator();
                rho_cd += s3.reduced_oscillator();
                rho_cat += &up * up.adjoint();
                probs.push(up.norm_squared());
            }
            let n = noise.num_trajectories as f64;
            let p_total = pairwise_sum(&probs);
            if p_total <= 1e-12 {
                return Err(SimulateError::ZeroProbability(p_total / n).into());
            }
            (rho_cs.unscale(n), rho_cd.unscale(n), rho_cat.unscale(p_total), p_total / n, noise.num_trajectories)
        }
    };

    let stages = vec![
        ("after_cs".to_string(), wigner(&after_cs, &config.grid)?),
        ("after_cd".to_string(), wigner(&after_cd, &config.grid)?),
        ("cat".to_string(), wigner(&cat_rho, &config.grid)?),
    ];
    let ideal_overlap = target.dotc(&(&cat_rho * &target)).re;
    let metrics = CatMetrics {
        negativity: negativity(&stages[2].1),
        p_up,
        ideal_overlap,
        cs_key: cs_pulse.key.clone(),
        cd_key: cd_pulse.key.clone(),
        cs_fidelity: cs_pulse.achieved_fidelity,
        cd_fidelity: cd_pulse.achieved_fidelity,
        syntheses,
        trajectories,
    };
    debug_assert_eq!(cs_pulse.gate.gate_type, CS);
    debug_assert_eq!(cd_pulse.gate.gate_type, CD);
    Ok(CatRun { stages, cat_state: cat_rho, metrics })
}

/// The same circuit with exact target unitaries instead of pulses.
pub fn ideal_cat_circuit(
    alpha: Complex64,
    zeta: Complex64,
    space: FockSpace,
    grid: &GridSpec,
) -> Result<(ComplexVector, f64, WignerGrid), Error> {
    let u_cs = crate::gates::target_unitary_cs(zeta, space)?;
    let u_cd = crate::gates::target_unitary_cd(alpha, space)?;
    let h_qubit = kron(&hadamard(), &identity(space.dim()));
    let s = HybridState::plus_vacuum(space).apply_unitary(&u_cs)?.apply_unitary(&h_qubit)?.apply_unitary(&u_cd)?;
    let (cat, p) = postselect(&s, QubitOutcome::Up)?;
    let w = wigner_pure(&cat, grid)?;
    Ok((cat, p, w))
}
