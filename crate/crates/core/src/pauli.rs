// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Unsigned Pauli strings and their action on dense states and matrices.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Statevector, C64, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Dense 2×2 matrix.
    pub fn matrix(self) -> ComplexMatrix {
        let entries = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix::from_row_major(2, 2, &entries).expect("2x2")
    }
}

/// A tensor product of single-qubit Paulis, qubit 0 leftmost.
///
/// Stored as X/Z bit masks over basis indices so the operator can be applied
/// to a state in `O(2^n)` without forming its matrix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidPauli(String::new()));
        }
        Ok(Self { letters })
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1);
        Self { letters: vec![Pauli::I; n] }
    }

    /// A single non-identity letter on qubit `q` of `n`.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.letters[q] = p;
        s
    }

    pub fn qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Bits flipped by the operator (X or Y letters).
    pub fn x_mask(&self) -> usize {
        self.mask(|p| matches!(p, Pauli::X | Pauli::Y))
    }

    /// Bits picking up a sign (Z or Y letters).
    pub fn z_mask(&self) -> usize {
        self.mask(|p| matches!(p, Pauli::Z | Pauli::Y))
    }

    fn mask(&self, pred: impl Fn(Pauli) -> bool) -> usize {
        let n = self.letters.len();
        self.letters.iter().enumerate().filter(|(_, &p)| pred(p)).fold(0, |m, (q, _)| m | (1 << (n - 1 - q)))
    }

    /// `i^{#Y}`, the phase that makes the mask form reproduce Y = iXZ.
    fn y_phase(&self) -> C64 {
        let ny = self.letters.iter().filter(|&&p| p == Pauli::Y).count();
        match ny % 4 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    }

    /// Whether the two strings commute as operators.
    pub fn commutes_with(&self, other: &Self) -> bool {
        let anti = (self.x_mask() & other.z_mask()).count_ones() + (self.z_mask() & other.x_mask()).count_ones();
        anti.is_multiple_of(2)
    }

    /// Writes `P·src` into `dst`.
    pub(crate) fn apply_into(&self, src: &[C64], dst: &mut [C64]) {
        let (xm, zm, phase) = (self.x_mask(), self.z_mask(), self.y_phase());
        for (b, &amp) in src.iter().enumerate() {
            let sign = if (b & zm).count_ones() % 2 == 0 { phase } else { -phase };
            dst[b ^ xm] = sign * amp;
        }
    }

    pub fn apply(&self, state: &Statevector) -> Statevector {
        let mut out = vec![ZERO; state.dim()];
        self.apply_into(state.amplitudes(), &mut out);
        Statevector::from_raw(out)
    }

    /// In-place `ψ ← exp(iθP)ψ = cos θ·ψ + i sin θ·Pψ`.
    pub fn rotate(&self, theta: f64, state: &mut Statevector) {
        let (xm, zm, phase) = (self.x_mask(), self.z_mask(), self.y_phase());
        let (c, s) = (theta.cos(), theta.sin());
        let is = I * s;
        let amps = state.amplitudes_mut();
        if xm == 0 {
            for (b, a) in amps.iter_mut().enumerate() {
                let sign = if (b & zm).count_ones() % 2 == 0 { phase } else { -phase };
                *a *= c + is * sign;
            }
            return;
        }
        // Pairs (b, b^xm) mix among themselves; visit each pair once.
        let top = 1usize << (usize::BITS - 1 - xm.leading_zeros());
        for b in 0..amps.len() {
            if b & top != 0 {
                continue;
            }
            let b2 = b ^ xm;
            let s1 = if (b & zm).count_ones() % 2 == 0 { phase } else { -phase };
            let s2 = if (b2 & zm).count_ones() % 2 == 0 { phase } else { -phase };
            let (a1, a2) = (amps[b], amps[b2]);
            // (Pψ)[b2] = s1·ψ[b], (Pψ)[b] = s2·ψ[b2]
            amps[b] = c * a1 + is * s2 * a2;
            amps[b2] = c * a2 + is * s1 * a1;
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| Pauli::from_char(c.to_ascii_uppercase()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidPauli(s.to_string()))?;
        Self::new(letters).map_err(|_| Error::InvalidPauli(s.to_string()))
    }
}

/// Dense `2^n × 2^n` matrix of a Pauli string.
pub fn pauli_matrix(p: &PauliString) -> ComplexMatrix {
    let d = p.dim();
    let (xm, zm, phase) = (p.x_mask(), p.z_mask(), p.y_phase());
    let mut m = ComplexMatrix::zeros(d, d);
    for b in 0..d {
        let sign = if (b & zm).count_ones() % 2 == 0 { phase } else { -phase };
        m.set(b ^ xm, b, sign);
    }
    m
}

/// `exp(iθP) = cos θ·I + i sin θ·P`, valid because `P² = I`.
pub fn pauli_rotation(p: &PauliString, theta: f64) -> ComplexMatrix {
    let d = p.dim();
    let ident = ComplexMatrix::identity(d).scale(C64::new(theta.cos(), 0.0));
    ident.add(&pauli_matrix(p).scale(I * theta.sin()))
}
