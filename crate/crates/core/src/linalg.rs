// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrices and statevectors.
//!
//! Everything here is sized for desk-scale simulation (up to about 12
//! qubits). Matrices are backed by `nalgebra` and stay square for every
//! operator that flows through the circuit and kernel code.

use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance for the unitarity flag.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance for the Hermiticity flag.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on statevector normalization.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::from_element(rows, cols, ZERO))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Builds a matrix from entries listed in row-major order.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: entries.len() });
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m.0[(k, k)] = d;
        }
        m
    }

    pub fn from_inner(inner: DMatrix<C64>) -> Self {
        Self(inner)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    /// Side length; panics in debug builds when the matrix is not square.
    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.rows(), self.cols());
        self.rows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.0[(row, col)] = value;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// `self† · inner · self`.
    pub fn conjugate(&self, inner: &Self) -> Self {
        Self(self.0.adjoint() * &inner.0 * &self.0)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn unitarity_error(&self) -> f64 {
        let gram = Self(self.0.adjoint() * &self.0);
        gram.max_abs_diff(&Self::identity(self.cols()))
    }

    pub fn is_unitary(&self) -> bool {
        self.rows() == self.cols() && self.unitarity_error() <= UNITARY_TOL
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self) -> bool {
        self.rows() == self.cols() && self.hermiticity_error() <= HERMITIAN_TOL
    }

    /// `Tr(self^k)` for `k ≥ 1`.
    pub fn trace_power(&self, k: u32) -> C64 {
        assert!(k >= 1);
        let mut acc = self.0.clone();
        for _ in 1..k {
            acc = &acc * &self.0;
        }
        acc.trace()
    }

    pub fn apply(&self, state: &Statevector) -> Statevector {
        Statevector { amps: self.matvec(&state.amps) }
    }

    pub(crate) fn matvec(&self, v: &[C64]) -> Vec<C64> {
        let d = self.cols();
        debug_assert_eq!(v.len(), d);
        (0..self.rows())
            .map(|r| {
                let mut acc = ZERO;
                for (c, &x) in v.iter().enumerate() {
                    acc += self.0[(r, c)] * x;
                }
                acc
            })
            .collect()
    }

    pub(crate) fn adjoint_matvec(&self, v: &[C64]) -> Vec<C64> {
        let d = self.rows();
        debug_assert_eq!(v.len(), d);
        (0..self.cols())
            .map(|c| {
                let mut acc = ZERO;
                for (r, &x) in v.iter().enumerate() {
                    acc += self.0[(r, c)].conj() * x;
                }
                acc
            })
            .collect()
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 * rhs.0)
    }
}

/// A normalized pure state on `n` qubits.
///
/// Basis index bit `n-1-q` holds qubit `q`, so qubit 0 is the most
/// significant (leftmost) tensor factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    amps: Vec<C64>,
}

impl Statevector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero_state(n: usize) -> Self {
        Self::basis(n, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Self {
        let dim = 1usize << n;
        assert!(index < dim, "basis index {index} out of range for {n} qubits");
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self { amps }
    }

    /// Wraps amplitudes, rejecting vectors that are not normalized or whose
    /// length is not a power of two.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: amps.len().next_power_of_two().max(1),
                found: amps.len(),
            });
        }
        let s = Self { amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(s)
    }

    /// Rescales arbitrary nonzero amplitudes onto the unit sphere.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::from_amplitudes(amps)
    }

    /// Tensor product of single-qubit states, qubit 0 first.
    pub fn product(qubits: &[[C64; 2]]) -> Result<Self> {
        let mut amps = vec![ONE];
        for q in qubits {
            amps = amps.iter().flat_map(|&a| [a * q[0], a * q[1]]).collect();
        }
        Self::from_amplitudes(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub(crate) fn from_raw(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Multiplies every amplitude by a unit-modulus phase.
    pub fn with_phase(&self, phase: C64) -> Self {
        Self { amps: self.amps.iter().map(|a| a * phase).collect() }
    }

    pub fn apply_matrix(&mut self, m: &ComplexMatrix) {
        self.amps = m.matvec(&self.amps);
    }

    pub fn apply_adjoint(&mut self, m: &ComplexMatrix) {
        self.amps = m.adjoint_matvec(&self.amps);
    }

    /// `⟨ψ|M|ψ⟩` without the Hermiticity check.
    pub fn expectation_complex(&self, m: &ComplexMatrix) -> C64 {
        let mv = m.matvec(&self.amps);
        self.amps.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    /// `⟨ψ|M|ψ⟩` for Hermitian `M`, failing when the imaginary residue
    /// exceeds `1e-10`.
    pub fn expectation(&self, m: &ComplexMatrix) -> Result<f64> {
        real_part(self.expectation_complex(m))
    }

    /// Rank-one density matrix `|ψ⟩⟨ψ|`.
    pub fn density_matrix(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                m.set(r, c, self.amps[r] * self.amps[c].conj());
            }
        }
        m
    }
}

/// Maximum imaginary part tolerated on a quantity that must be real.
pub const IMAG_TOL: f64 = 1e-10;

pub(crate) fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}
