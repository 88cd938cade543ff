// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Wigner functions on a rectangular (x, p) grid.
//!
//! Convention: `x = (a + a†)/√2`, `p = i(a† − a)/√2`, and
//! `W(x, p) = (1/π) Tr[ρ D(β) Π D†(β)]` with `β = (x + ip)/√2` and parity
//! `Π = (−1)^{a†a}`, so the vacuum is `e^{−x²−p²}/π`. Each Fock-basis
//! element is evaluated in closed form through generalized Laguerre
//! polynomials, which is exact for the truncated state (no displaced
//! operator is ever truncated).

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SimulateError;
use crate::linalg::{ComplexMatrix, ComplexVector};

/// Above this population in the top two Fock levels the state is probably
/// clipped by the truncation.
pub const TAIL_WARNING: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x_min: -5.0, x_max: 5.0, p_min: -5.0, p_max: 5.0, points: 201 }
    }
}

impl GridSpec {
    pub fn square(half_width: f64, points: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, p_min: -half_width, p_max: half_width, points }
    }

    fn validate(&self) -> Result<(), SimulateError> {
        let ok = self.points >= 2
            && [self.x_min, self.x_max, self.p_min, self.p_max].iter().all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.p_max > self.p_min;
        if ok {
            Ok(())
        } else {
            Err(SimulateError::Grid(format!("{self:?}")))
        }
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let step = (hi - lo) / (n - 1) as f64;
        (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// `values[(i, j)] = W(x[i], p[j])`.
    pub values: DMatrix<f64>,
    /// Population of the two highest Fock levels.
    pub tail_population: f64,
}

impl WignerGrid {
    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn dp(&self) -> f64 {
        self.p[1] - self.p[0]
    }

    /// `∑ W dx dp`.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.dx() * self.dp()
    }

    /// `∫ W dp` at every grid x.
    pub fn marginal_x(&self) -> Vec<f64> {
        (0..self.x.len()).map(|i| self.values.row(i).sum() * self.dp()).collect()
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    /// CSV with header `x,p,W`, x-major.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "x,p,W")?;
        for (i, x) in self.x.iter().enumerate() {
            for (j, p) in self.p.iter().enumerate() {
                writeln!(out, "{x},{p},{:e}", self.values[(i, j)])?;
            }
        }
        Ok(())
    }
}

/// Most negative grid value, or 0 when the grid is non-negative.
pub fn negativity(grid: &WignerGrid) -> f64 {
    grid.min().min(0.0)
}

pub fn wigner_pure(psi: &ComplexVector, grid: &GridSpec) -> Result<WignerGrid, SimulateError> {
    wigner(&(psi * psi.adjoint()), grid)
}

/// Wigner function of a (possibly unnormalized) oscillator density matrix.
pub fn wigner(rho: &ComplexMatrix, grid: &GridSpec) -> Result<WignerGrid, SimulateError> {
    grid.validate()?;
    let d = rho.nrows();
    if d == 0 || rho.ncols() != d {
        return Err(SimulateError::Dimension { expected: d, got: rho.ncols() });
    }
    let tail_population: f64 = (d.saturating_sub(2)..d).map(|n| rho[(n, n)].re).sum();
    if tail_population > TAIL_WARNING {
        log::warn!(
            "Fock truncation may clip this state: population {tail_population:.2e} in the top two levels; \
             raise n_max for a faithful Wigner function"
        );
    }
    // norm[m][k] = sqrt(m! / (m+k)!)
    let norm: Vec<Vec<f64>> = (0..d)
        .map(|m| {
            let mut acc = 1.0;
            (0..d - m)
                .map(|k| {
                    if k > 0 {
                        acc /= ((m + k) as f64).sqrt();
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let xs = GridSpec::axis(grid.x_min, grid.x_max, grid.points);
    let ps = GridSpec::axis(grid.p_min, grid.p_max, grid.points);
    let mut values = DMatrix::zeros(xs.len(), ps.len());
    let mut lag = vec![0.0; d];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &p) in ps.iter().enumerate() {
            let r2 = 2.0 * (x * x + p * p);
            let z = Complex64::new(x, p) * std::f64::consts::SQRT_2;
            let mut zk = Complex64::new(1.0, 0.0);
            let mut w = 0.0;
            for k in 0..d {
                laguerre_column(k, r2, d - k, &mut lag);
                for m in 0..d - k {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    let term = rho[(m, m + k)] * zk * (sign * norm[m][k] * lag[m]);
                    w += if k == 0 { term.re } else { 2.0 * term.re };
                }
                zk *= z;
            }
            values[(i, j)] = w * (-r2 / 2.0).exp() / PI;
        }
    }
    Ok(WignerGrid { x: xs, p: ps, values, tail_population })
}

/// `out[m] = L_m^{(k)}(t)` for `m < len`.
fn laguerre_column(k: usize, t: f64, len: usize, out: &mut [f64]) {
    let k = k as f64;
    if len == 0 {
        return;
    }
    out[0] = 1.0;
    if len > 1 {
        out[1] = 1.0 + k - t;
    }
    for m in 1..len.saturating_sub(1) {
        let mf = m as f64;
        out[m + 1] = ((2.0 * mf + 1.0 + k - t) * out[m] - (mf + k) * out[m - 1]) / (mf + 1.0);
    }
}

/// `|ψ(x)|²` in the position representation, from Hermite functions.
pub fn position_density(psi: &ComplexVector, x: f64) -> f64 {
    let mut amp = Complex64::new(0.0, 0.0);
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-x * x / 2.0).exp();
    for (n, cn) in psi.iter().enumerate() {
        amp += cn * cur;
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    amp.norm_sqr()
}
