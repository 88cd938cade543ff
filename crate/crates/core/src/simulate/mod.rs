// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! State evolution, dephasing trajectories, Wigner functions and the squeezed
//! cat demonstration circuit.

mod cat;
mod noise;
mod state;
mod wigner;

use thiserror::Error;

pub use cat::{ideal_cat_circuit, ideal_cat_state, run_cat_circuit, CatConfig, CatMetrics, CatRun};
pub use noise::{noisy_fidelity, pairwise_sum, sample_dephasing_trajectory, NoiseModel, NoisyFidelity};
pub use state::{postselect, HybridState, QubitOutcome};
pub use wigner::{negativity, position_density, wigner, wigner_pure, GridSpec, WignerGrid, TAIL_WARNING};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulateError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("state norm {0} is not 1")]
    NotNormalized(f64),
    #[error("post-selection outcome has probability {0:e}")]
    ZeroProbability(f64),
    #[error("invalid noise model: {0}")]
    Noise(String),
    #[error("invalid Wigner grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Synth(#[from] crate::synth::SynthError),
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use num_complex::Complex64;

    use super::*;
    use crate::codebook::ModelSpec;
    use crate::device::bundled_device;
    use crate::gates::GateSpec;
    use crate::linalg::{c, displacement, fock_state, FockSpace};
    use crate::synth::{build_hamiltonian_cd, propagate};

    fn space() -> FockSpace {
        FockSpace::from_n_max(15).unwrap()
    }

    #[test]
    fn vacuum_wigner_is_gaussian() {
        let w = wigner_pure(&fock_state(space(), 0), &GridSpec::default()).unwrap();
        let mut err: f64 = 0.0;
        for (i, x) in w.x.iter().enumerate() {
            for (j, p) in w.p.iter().enumerate() {
                err = err.max((w.values[(i, j)] - (-x * x - p * p).exp() / PI).abs());
            }
        }
        assert!(err < 1e-12, "{err}");
        assert!((w.integral() - 1.0).abs() < 1e-6);
        assert_eq!(negativity(&w), 0.0);
    }

    #[test]
    fn fock_one_has_negative_center() {
        let w = wigner_pure(&fock_state(space(), 1), &GridSpec::default()).unwrap();
        assert!((w.values[(100, 100)] + 1.0 / PI).abs() < 1e-12);
        assert!((negativity(&w) + 1.0 / PI).abs() < 1e-12);
        let (x, p) = (0.7, -1.3);
        let r2: f64 = x * x + p * p;
        let grid = GridSpec { x_min: x, x_max: x + 1.0, p_min: p, p_max: p + 1.0, points: 2 };
        let w = wigner_pure(&fock_state(space(), 1), &grid).unwrap();
        assert!((w.values[(0, 0)] - (2.0 * r2 - 1.0) * (-r2).exp() / PI).abs() < 1e-12);
    }

    #[test]
    fn coherent_state_peak_sits_at_scaled_alpha() {
        let alpha = c(0.8, -0.5);
        let psi = displacement(alpha, space()).unwrap() * fock_state(space(), 0);
        let (x0, p0) = (2f64.sqrt() * alpha.re, 2f64.sqrt() * alpha.im);
        let grid = GridSpec { x_min: x0 - 0.5, x_max: x0 + 0.5, p_min: p0 - 0.5, p_max: p0 + 0.5, points: 11 };
        let w = wigner_pure(&psi, &grid).unwrap();
        for (i, x) in w.x.iter().enumerate() {
            for (j, p) in w.p.iter().enumerate() {
                let want = (-(x - x0).powi(2) - (p - p0).powi(2)).exp() / PI;
                assert!((w.values[(i, j)] - want).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn marginal_matches_position_density() {
        let cat = ideal_cat_state(c(PI.sqrt(), 0.0), c(0.5, 0.0), space()).unwrap();
        let w = wigner_pure(&cat, &GridSpec::square(6.0, 241)).unwrap();
        for (i, x) in w.x.iter().enumerate().step_by(10) {
            assert!((w.marginal_x()[i] - position_density(&cat, *x)).abs() < 1e-4, "x = {x}");
        }
        // coherent state: |ψ(x)|² = exp(−(x − √2 α)²)/√π
        let psi = displacement(c(0.6, 0.0), space()).unwrap() * fock_state(space(), 0);
        let x0 = 2f64.sqrt() * 0.6;
        for x in [-1.0, 0.0, 0.4, 2.0] {
            let want = (-(x - x0) * (x - x0)).exp() / PI.sqrt();
            assert!((position_density(&psi, x) - want).abs() < 1e-8);
        }
    }

    #[test]
    fn grid_and_csv() {
        assert!(wigner_pure(&fock_state(space(), 0), &GridSpec::square(1.0, 1)).is_err());
        assert!(
            wigner_pure(&fock_state(space(), 0), &GridSpec { x_min: 1.0, x_max: 0.0, ..GridSpec::default() }).is_err()
        );
        let w = wigner_pure(&fock_state(space(), 0), &GridSpec::square(1.0, 3)).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.starts_with("x,p,W\n-1,-1,"));
        let top = wigner_pure(&fock_state(space(), 15), &GridSpec::square(1.0, 3)).unwrap();
        assert!(top.tail_population > TAIL_WARNING);
    }

    #[test]
    fn postselection_probabilities_sum_to_one() {
        let cat = ideal_cat_circuit(c(PI.sqrt(), 0.0), c(0.5, 0.0), space(), &GridSpec::square(5.0, 101)).unwrap();
        let amps = crate::gates::target_unitary_cd(c(0.7, 0.2), space()).unwrap()
            * HybridState::plus_vacuum(space()).amplitudes();
        let s = HybridState::new(space(), amps).unwrap();
        let (_, up) = postselect(&s, QubitOutcome::Up).unwrap();
        let (_, down) = postselect(&s, QubitOutcome::Down).unwrap();
        assert!((up + down - 1.0).abs() < 1e-12);
        assert!((cat.1 - 0.514).abs() < 0.03, "{}", cat.1);
        let zero = HybridState::product(space(), [c(1.0, 0.0), c(0.0, 0.0)], &fock_state(space(), 0)).unwrap();
        assert!(matches!(postselect(&zero, QubitOutcome::Down), Err(SimulateError::ZeroProbability(_))));
        let bad = fock_state(space(), 0) * c(2.0, 0.0);
        assert!(HybridState::product(space(), [c(1.0, 0.0), c(0.0, 0.0)], &bad).is_err());
    }

    #[test]
    fn noise_samples_have_the_requested_variance() {
        let noise = NoiseModel::new(18.0, 1, 42).unwrap();
        let tau = 0.5e-6;
        let eps = noise.sample_epsilons(100_000, tau, 0);
        let n = eps.len() as f64;
        let mean = eps.iter().sum::<f64>() / n;
        let var = eps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let want = 2.0 * 18.0 / tau;
        assert!((var / want - 1.0).abs() < 0.03, "{var} vs {want}");
        assert_eq!(eps, noise.sample_epsilons(100_000, tau, 0));
        assert_ne!(eps[..10], noise.sample_epsilons(10, tau, 1)[..]);
        assert!(NoiseModel::new(-1.0, 1, 0).is_err());
        assert!(NoiseModel::new(1.0, 0, 0).is_err());
    }

    #[test]
    fn zero_gamma_reproduces_closed_evolution_bitwise() {
        let dev = bundled_device("sydney_gkp_v1").unwrap();
        let model = ModelSpec { n_max: 5, num_tslots: 20, ..ModelSpec::default() };
        let problem = build_hamiltonian_cd(&GateSpec::cd(c(0.5, 0.0)).unwrap(), &dev, &model).unwrap();
        let u: Vec<Vec<f64>> = (0..2).map(|ch| (0..20).map(|k| 0.3 * ((k + ch) as f64).sin()).collect()).collect();
        let closed = propagate(&problem, &u).unwrap();
        let noise = NoiseModel::new(0.0, 3, 9).unwrap();
        assert_eq!(sample_dephasing_trajectory(&problem, &u, &noise, 2).unwrap(), closed);
        let single = noisy_fidelity(&problem, &u, &NoiseModel::new(0.0, 1, 9).unwrap()).unwrap();
        assert!(single.std.is_none());
        let noisy = noisy_fidelity(&problem, &u, &NoiseModel::new(500.0, 8, 9).unwrap()).unwrap();
        assert_eq!(noisy.per_trajectory.len(), 8);
        assert!(noisy.std.unwrap() > 0.0);
        assert!(noisy.mean < single.mean);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sqrt()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn ideal_cat_state_is_even() {
        let cat = ideal_cat_state(c(PI.sqrt(), 0.0), c(0.5, 0.0), space()).unwrap();
        let odd: f64 = cat.iter().skip(1).step_by(2).map(Complex64::norm_sqr).sum();
        assert!(odd < 1e-20);
        assert!((cat.norm() - 1.0).abs() < 1e-12);
    }
}
