// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra on the joint qubit ⊗ oscillator space.
//!
//! Every operator in the crate is a [`ComplexMatrix`]. Tensor products always
//! put the qubit factor on the left and the oscillator on the right, so a
//! joint basis index is `qubit * dim + fock`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("invalid Fock space: dimension {0} (need at least 2)")]
    InvalidSpace(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("singular Pade denominator in matrix exponential")]
    Singular,
}

/// Truncated oscillator space holding Fock levels `0..dim`.
///
/// A model truncation `n_max` maps to `dim = n_max + 1`, so `n_max = 15`
/// keeps `|15⟩` representable and gives a 32-dimensional joint space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn with_dim(dim: usize) -> Result<Self, LinalgError> {
        if dim < 2 {
            return Err(LinalgError::InvalidSpace(dim));
        }
        Ok(Self { dim })
    }

    pub fn from_n_max(n_max: usize) -> Result<Self, LinalgError> {
        Self::with_dim(n_max + 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_max(&self) -> usize {
        self.dim - 1
    }

    /// Dimension of qubit ⊗ oscillator.
    pub fn joint_dim(&self) -> usize {
        2 * self.dim
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// `a|n⟩ = √n |n−1⟩`.
pub fn annihilation(space: FockSpace) -> ComplexMatrix {
    let d = space.dim();
    ComplexMatrix::from_fn(d, d, |r, col| if col == r + 1 { c((col as f64).sqrt(), 0.0) } else { ZERO })
}

pub fn creation(space: FockSpace) -> ComplexMatrix {
    annihilation(space).adjoint()
}

pub fn number(space: FockSpace) -> ComplexMatrix {
    let d = space.dim();
    ComplexMatrix::from_fn(d, d, |r, col| if r == col { c(r as f64, 0.0) } else { ZERO })
}

/// Position quadrature `(a + a†)/√2`.
pub fn quadrature_x(space: FockSpace) -> ComplexMatrix {
    let a = annihilation(space);
    (&a + a.adjoint()).scale(std::f64::consts::FRAC_1_SQRT_2)
}

/// Momentum quadrature `i(a† − a)/√2`.
pub fn quadrature_p(space: FockSpace) -> ComplexMatrix {
    let a = annihilation(space);
    (a.adjoint() - &a) * c(0.0, std::f64::consts::FRAC_1_SQRT_2)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

/// Projector onto `|q⟩⟨q|` for a computational-basis qubit state.
pub fn qubit_projector(q: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(q, q)] = ONE;
    m
}

/// Projectors onto the σ_x eigenstates `|+⟩⟨+|` and `|−⟩⟨−|`.
pub fn plus_projector() -> ComplexMatrix {
    ComplexMatrix::from_element(2, 2, c(0.5, 0.0))
}

pub fn minus_projector() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(-0.5, 0.0), c(-0.5, 0.0), c(0.5, 0.0)])
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) < tol
}

/// `max |U†U − I|`.
pub fn unitarity_error(u: &ComplexMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

fn check_finite(m: &ComplexMatrix, what: &'static str) -> Result<(), LinalgError> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(LinalgError::NonFinite(what))
    }
}

/// Eigendecomposition of a Hermitian matrix, kept around so callers can both
/// exponentiate and differentiate through the exponential.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn new(h: &ComplexMatrix) -> Self {
        // symmetrize so round-off in the caller never leaks into the solver
        let sym = (h + h.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(sym);
        Self { values: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    /// `V f(λ) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(−i H t)`, unitary to machine precision.
    pub fn evolution(&self, t: f64) -> ComplexMatrix {
        self.apply(|lam| Complex64::from_polar(1.0, -lam * t))
    }
}

/// `exp(−i H t)` for Hermitian `H`.
pub fn evolve(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    HermitianEigen::new(h).evolution(t)
}

/// Matrix exponential.
///
/// Anti-Hermitian and Hermitian inputs go through an eigendecomposition,
/// which keeps `exp` of a gate generator unitary to round-off. Everything
/// else uses scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    check_finite(a, "matrix exponential argument")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    if a.iter().all(|z| *z == ZERO) {
        return Ok(identity(n));
    }
    let scale = max_abs(a).max(1.0);
    if max_abs_diff(a, &(-a.adjoint())) <= 1e-14 * scale {
        // A = −iH with H = iA Hermitian
        let h = a * I;
        return Ok(HermitianEigen::new(&h).evolution(1.0));
    }
    if max_abs_diff(a, &a.adjoint()) <= 1e-14 * scale {
        return Ok(HermitianEigen::new(a).apply(|lam| c(lam.exp(), 0.0)));
    }
    expm_pade(a)
}

fn one_norm(a: &ComplexMatrix) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Scaling and squaring, Padé(13) (Higham 2005 coefficients).
pub fn expm_pade(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    check_finite(a, "matrix exponential argument")?;
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.scale(0.5_f64.powi(squarings));
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| c(B[k], 0.0);

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9)) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(LinalgError::Singular)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    check_finite(&r, "matrix exponential result")?;
    Ok(r)
}

/// Displacement `D(α) = exp(α a† − α* a)` on the truncated space.
pub fn displacement(alpha: Complex64, space: FockSpace) -> Result<ComplexMatrix, LinalgError> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(LinalgError::NonFinite("displacement amplitude"));
    }
    let a = annihilation(space);
    let gen = a.adjoint() * alpha - &a * alpha.conj();
    expm(&gen)
}

/// Squeezing `S(ζ) = exp[½(ζ* a² − ζ a†²)]`.
///
/// For real positive ζ = r the x quadrature is squeezed to `e^{−2r}/2`.
pub fn squeezing(zeta: Complex64, space: FockSpace) -> Result<ComplexMatrix, LinalgError> {
    if !(zeta.re.is_finite() && zeta.im.is_finite()) {
        return Err(LinalgError::NonFinite("squeezing parameter"));
    }
    let a = annihilation(space);
    let a2 = &a * &a;
    let gen = (&a2 * zeta.conj() - a2.adjoint() * zeta).scale(0.5);
    expm(&gen)
}

/// `|n⟩` in the oscillator space.
pub fn fock_state(space: FockSpace, n: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(space.dim());
    v[n] = ONE;
    v
}

/// `⟨ψ|O|ψ⟩`.
pub fn expectation(op: &ComplexMatrix, psi: &ComplexVector) -> Complex64 {
    psi.dotc(&(op * psi))
}

/// Variance of a Hermitian observable in a pure state.
pub fn variance(op: &ComplexMatrix, psi: &ComplexVector) -> f64 {
    let m = expectation(op, psi).re;
    let m2 = expectation(&(op * op), psi).re;
    m2 - m * m
}
