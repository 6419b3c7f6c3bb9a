// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::pauli::{pauli_matrix, PauliString};
use crate::random::sample_pauli;

/// A Hermitian observable `O = Σ c_j P_j` with its dense matrix cached, plus
/// the target value `O₀` of the single-target loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    qubits: usize,
    terms: Vec<(f64, PauliString)>,
    matrix: ComplexMatrix,
    target: f64,
}

impl Observable {
    pub fn from_terms(qubits: usize, terms: Vec<(f64, PauliString)>, target: f64) -> Result<Self> {
        let dim = 1usize << qubits;
        let mut matrix = ComplexMatrix::zeros(dim, dim);
        for (c, p) in &terms {
            if p.qubits() != qubits {
                return Err(Error::DimensionMismatch { expected: qubits, found: p.qubits() });
            }
            if !c.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite coefficient {c}")));
            }
            matrix = matrix.add(&pauli_matrix(p).scale(C64::new(*c, 0.0)));
        }
        Ok(Self { qubits, terms, matrix, target })
    }

    /// A single Pauli string with unit coefficient.
    pub fn pauli(p: PauliString, target: f64) -> Self {
        Self::from_terms(p.qubits(), vec![(1.0, p)], target).expect("consistent qubit count")
    }

    /// Arbitrary Hermitian matrix without a Pauli decomposition.
    pub fn from_matrix(matrix: ComplexMatrix, target: f64) -> Result<Self> {
        let dim = matrix.rows();
        if dim != matrix.cols() || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch { expected: dim.next_power_of_two(), found: matrix.cols() });
        }
        if !matrix.is_hermitian() {
            return Err(Error::InvalidArgument(format!(
                "matrix is not Hermitian (error {:e})",
                matrix.hermiticity_error()
            )));
        }
        Ok(Self { qubits: dim.trailing_zeros() as usize, terms: Vec::new(), matrix, target })
    }

    /// `count` terms with Pauli strings drawn uniformly from all `4^n`
    /// strings (identity included) and coefficients uniform in `[lo, hi)`.
    pub fn random_pauli_sum(
        qubits: usize,
        count: usize,
        coeff_range: (f64, f64),
        target: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let (lo, hi) = coeff_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("empty coefficient range [{lo}, {hi})")));
        }
        let terms = (0..count)
            .map(|_| {
                let p = sample_pauli(qubits, false, rng);
                let c = lo + (hi - lo) * rng.random::<f64>();
                (c, p)
            })
            .collect();
        Self::from_terms(qubits, terms, target)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn with_target(&self, target: f64) -> Self {
        Self { target, ..self.clone() }
    }

    /// `Tr(O^k)`, computed from the dense matrix.
    pub fn trace_moment(&self, k: u32) -> f64 {
        if k == 0 {
            return self.dim() as f64;
        }
        self.matrix.trace_power(k).re
    }

    /// `Tr(O·other)`.
    pub fn trace_product(&self, other: &Observable) -> f64 {
        (self.matrix() * other.matrix()).trace().re
    }
}
