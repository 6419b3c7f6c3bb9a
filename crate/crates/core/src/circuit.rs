// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Layered ansatz circuits `U(θ) = ∏ W_ℓ exp(iθ_ℓ X_ℓ)`.
//!
//! Layer 1 acts on the state first: within a layer the rotation
//! `exp(iθ_ℓ X_ℓ)` is applied and then the fixed unitary `W_ℓ`. Every ansatz
//! family, including the hardware-efficient ones, is stored in this normal
//! form so the gradient code has a single path.

use std::f64::consts::{FRAC_PI_8, TAU};
use std::fmt;

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Statevector, C64, ONE};
use crate::pauli::{pauli_rotation, Pauli, PauliString};
use crate::random::{haar_unitary, sample_pauli};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnsatzFamily {
    RandomHaar,
    HardwareEfficientCphase,
    HardwareEfficientCnot,
}

impl AnsatzFamily {
    pub fn tag(self) -> &'static str {
        match self {
            AnsatzFamily::RandomHaar => "random-haar",
            AnsatzFamily::HardwareEfficientCphase => "hardware-efficient-cphase",
            AnsatzFamily::HardwareEfficientCnot => "hardware-efficient-cnot",
        }
    }
}

impl fmt::Display for AnsatzFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardwareVariant {
    /// Random-axis single-qubit rotations, then a nearest-neighbour chain of
    /// trainable two-qubit phase rotations.
    CphaseLadder,
    /// Z-Y-Z rotations on every qubit, then a fixed CNOT chain.
    CnotSu2,
}

/// The unparameterized gate `W_ℓ` of a layer.
#[derive(Debug, Clone, PartialEq)]
pub enum FixedGate {
    Identity,
    Dense(ComplexMatrix),
}

impl FixedGate {
    pub fn apply(&self, state: &mut Statevector) {
        if let FixedGate::Dense(m) = self {
            state.apply_matrix(m);
        }
    }

    pub fn apply_adjoint(&self, state: &mut Statevector) {
        if let FixedGate::Dense(m) = self {
            state.apply_adjoint(m);
        }
    }

    pub fn to_matrix(&self, dim: usize) -> ComplexMatrix {
        match self {
            FixedGate::Identity => ComplexMatrix::identity(dim),
            FixedGate::Dense(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub generator: PauliString,
    pub fixed: FixedGate,
}

impl Layer {
    /// `ψ ← W exp(iθX) ψ`.
    pub fn apply(&self, theta: f64, state: &mut Statevector) {
        self.generator.rotate(theta, state);
        self.fixed.apply(state);
    }

    /// `ψ ← exp(−iθX) W† ψ`.
    pub fn apply_inverse(&self, theta: f64, state: &mut Statevector) {
        self.fixed.apply_adjoint(state);
        self.generator.rotate(-theta, state);
    }

    pub fn matrix(&self, theta: f64) -> ComplexMatrix {
        let rot = pauli_rotation(&self.generator, theta);
        match &self.fixed {
            FixedGate::Identity => rot,
            FixedGate::Dense(w) => w * &rot,
        }
    }
}

/// An immutable ansatz in layered normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzSpec {
    qubits: usize,
    layers: Vec<Layer>,
    family: AnsatzFamily,
}

impl AnsatzSpec {
    pub fn new(qubits: usize, layers: Vec<Layer>, family: AnsatzFamily) -> Result<Self> {
        let dim = 1usize << qubits;
        for layer in &layers {
            if layer.generator.qubits() != qubits {
                return Err(Error::DimensionMismatch { expected: qubits, found: layer.generator.qubits() });
            }
            if let FixedGate::Dense(w) = &layer.fixed {
                if w.rows() != dim || w.cols() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: w.rows() });
                }
                if !w.is_unitary() {
                    return Err(Error::InvalidArgument(format!(
                        "fixed gate is not unitary (error {:e})",
                        w.unitarity_error()
                    )));
                }
            }
        }
        Ok(Self { qubits, layers, family })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn family(&self) -> AnsatzFamily {
        self.family
    }

    pub fn generator(&self, layer: usize) -> &PauliString {
        &self.layers[layer].generator
    }

    /// Dense `W_ℓ` for a zero-based layer index.
    pub fn fixed_unitary(&self, layer: usize) -> ComplexMatrix {
        self.layers[layer].fixed.to_matrix(self.dim())
    }

    /// SHA-256 over the generators and the bit patterns of every fixed gate.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.family.tag().as_bytes());
        h.update((self.qubits as u64).to_le_bytes());
        for layer in &self.layers {
            h.update(layer.generator.to_string().as_bytes());
            match &layer.fixed {
                FixedGate::Identity => h.update([0u8]),
                FixedGate::Dense(m) => {
                    h.update([1u8]);
                    for z in m.inner().iter() {
                        h.update(z.re.to_bits().to_le_bytes());
                        h.update(z.im.to_bits().to_le_bytes());
                    }
                }
            }
        }
        hex::encode(h.finalize())
    }

    pub(crate) fn check_params(&self, theta: &ParameterVector) -> Result<()> {
        if theta.len() != self.layers.len() {
            return Err(Error::ParameterCount { expected: self.layers.len(), found: theta.len() });
        }
        Ok(())
    }

    pub(crate) fn check_state(&self, state: &Statevector) -> Result<()> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: state.dim() });
        }
        Ok(())
    }
}

/// Variational angles `θ_ℓ` in radians, one per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(angles: Vec<f64>) -> Self {
        Self(angles)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    /// Independent uniform angles in `[0, 2π)`.
    pub fn uniform(len: usize, rng: &mut impl Rng) -> Self {
        Self((0..len).map(|_| rng.random::<f64>() * TAU).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Random ansatz with a fresh Haar `W_ℓ` and a fresh uniform Pauli `X_ℓ` per
/// layer.
pub fn build_random_ansatz(qubits: usize, layers: usize, exclude_identity: bool, rng: &mut impl Rng) -> AnsatzSpec {
    assert!(qubits >= 1);
    let dim = 1usize << qubits;
    let layers = (0..layers)
        .map(|_| {
            let w = haar_unitary(dim, rng);
            let x = sample_pauli(qubits, exclude_identity, rng);
            Layer { generator: x, fixed: FixedGate::Dense(w) }
        })
        .collect();
    AnsatzSpec { qubits, layers, family: AnsatzFamily::RandomHaar }
}

/// Hardware-efficient ansatz unrolled into single-generator layers.
///
/// `CphaseLadder` has `n + (n − 1)` parameters per block: one rotation per
/// qubit with an axis drawn uniformly from {X, Y, Z}, then `exp(iφ Z_q Z_{q+1})`
/// for each neighbouring pair. `CnotSu2` has `3n` parameters per block and
/// closes each block with the CNOT chain as the fixed gate of its last layer.
pub fn build_hardware_efficient(
    qubits: usize,
    depth: usize,
    variant: HardwareVariant,
    rng: &mut impl Rng,
) -> Result<AnsatzSpec> {
    if qubits < 2 {
        return Err(Error::TooFewQubits(qubits));
    }
    let mut layers = Vec::new();
    match variant {
        HardwareVariant::CphaseLadder => {
            for _ in 0..depth {
                for q in 0..qubits {
                    let axis = [Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..3)];
                    layers.push(Layer { generator: PauliString::single(qubits, q, axis), fixed: FixedGate::Identity });
                }
                for q in 0..qubits - 1 {
                    let mut letters = vec![Pauli::I; qubits];
                    letters[q] = Pauli::Z;
                    letters[q + 1] = Pauli::Z;
                    let zz = PauliString::new(letters)?;
                    layers.push(Layer { generator: zz, fixed: FixedGate::Identity });
                }
            }
        }
        HardwareVariant::CnotSu2 => {
            let chain = cnot_chain(qubits);
            for _ in 0..depth {
                for q in 0..qubits {
                    for axis in [Pauli::Z, Pauli::Y, Pauli::Z] {
                        layers.push(Layer {
                            generator: PauliString::single(qubits, q, axis),
                            fixed: FixedGate::Identity,
                        });
                    }
                }
                if let Some(last) = layers.last_mut() {
                    last.fixed = FixedGate::Dense(chain.clone());
                }
            }
        }
    }
    let family = match variant {
        HardwareVariant::CphaseLadder => AnsatzFamily::HardwareEfficientCphase,
        HardwareVariant::CnotSu2 => AnsatzFamily::HardwareEfficientCnot,
    };
    AnsatzSpec::new(qubits, layers, family)
}

/// CNOT between control `c` and target `t` as a permutation matrix.
pub fn cnot(qubits: usize, control: usize, target: usize) -> ComplexMatrix {
    let dim = 1usize << qubits;
    let cbit = 1usize << (qubits - 1 - control);
    let tbit = 1usize << (qubits - 1 - target);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for b in 0..dim {
        let out = if b & cbit != 0 { b ^ tbit } else { b };
        m.set(out, b, ONE);
    }
    m
}

/// `CNOT(n−2, n−1) ⋯ CNOT(0, 1)`: the pair (0, 1) acts first.
pub fn cnot_chain(qubits: usize) -> ComplexMatrix {
    (0..qubits - 1).fold(ComplexMatrix::identity(1 << qubits), |acc, q| &cnot(qubits, q, q + 1) * &acc)
}

/// Product state with every qubit in `exp(−i(π/8)Y)|0⟩`.
pub fn hardware_initial_state(qubits: usize) -> Statevector {
    let (c, s) = (FRAC_PI_8.cos(), FRAC_PI_8.sin());
    // exp(−iφY)|0⟩ = cos φ|0⟩ + sin φ|1⟩
    let q = [C64::new(c, 0.0), C64::new(s, 0.0)];
    Statevector::product(&vec![q; qubits]).expect("normalized")
}

/// `U(θ)` as a dense matrix.
pub fn circuit_unitary(ansatz: &AnsatzSpec, theta: &ParameterVector) -> Result<ComplexMatrix> {
    ansatz.check_params(theta)?;
    Ok(product_of_layers(ansatz, theta, 0..ansatz.num_layers()))
}

fn product_of_layers(ansatz: &AnsatzSpec, theta: &ParameterVector, range: std::ops::Range<usize>) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(ansatz.dim());
    for k in range {
        u = &ansatz.layers[k].matrix(theta.as_slice()[k]) * &u;
    }
    u
}

/// `(V₋, V₊)` for the one-based layer index `ell`: `V₋` holds layers
/// `1..=ell`, `V₊` holds layers `ell+1..=L`, and `V₊·V₋ = U(θ)`.
pub fn prefix_suffix(
    ansatz: &AnsatzSpec,
    theta: &ParameterVector,
    ell: usize,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    ansatz.check_params(theta)?;
    let l = ansatz.num_layers();
    if ell == 0 || ell > l {
        return Err(Error::LayerOutOfRange { index: ell, layers: l });
    }
    Ok((product_of_layers(ansatz, theta, 0..ell), product_of_layers(ansatz, theta, ell..l)))
}

/// `U(θ)|ψ⟩`, applied layer by layer.
pub fn evolve(ansatz: &AnsatzSpec, theta: &ParameterVector, state: &Statevector) -> Result<Statevector> {
    ansatz.check_params(theta)?;
    ansatz.check_state(state)?;
    let mut psi = state.clone();
    for (layer, &t) in ansatz.layers.iter().zip(theta.as_slice()) {
        layer.apply(t, &mut psi);
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::RngStream;

    #[test]
    fn empty_ansatz_is_identity() {
        let mut rng = RngStream::new(0, 0);
        let a = build_random_ansatz(2, 0, true, &mut rng);
        let u = circuit_unitary(&a, &ParameterVector::zeros(0)).unwrap();
        assert_eq!(u.max_abs_diff(&ComplexMatrix::identity(4)), 0.0);
    }

    #[test]
    fn random_ansatz_shapes_and_determinism() {
        let a = build_random_ansatz(2, 64, true, &mut RngStream::new(9, 3));
        assert_eq!(a.num_layers(), 64);
        for k in 0..64 {
            let w = a.fixed_unitary(k);
            assert_eq!((w.rows(), w.cols()), (4, 4));
            assert!(w.is_unitary());
            assert!(!a.generator(k).is_identity());
        }
        let b = build_random_ansatz(2, 64, true, &mut RngStream::new(9, 3));
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
    }

    #[test]
    fn parameter_count_mismatch() {
        let a = build_random_ansatz(2, 3, true, &mut RngStream::new(0, 0));
        assert!(matches!(
            circuit_unitary(&a, &ParameterVector::zeros(2)),
            Err(Error::ParameterCount { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn prefix_suffix_edges() {
        let mut rng = RngStream::new(4, 0);
        let a = build_random_ansatz(2, 5, true, &mut rng);
        let theta = ParameterVector::uniform(5, &mut rng);
        let (_, vp) = prefix_suffix(&a, &theta, 5).unwrap();
        assert!(vp.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        let (vm, _) = prefix_suffix(&a, &theta, 1).unwrap();
        let first = &a.fixed_unitary(0) * &pauli_rotation(a.generator(0), theta.as_slice()[0]);
        assert!(vm.max_abs_diff(&first) < 1e-14);
        assert!(prefix_suffix(&a, &theta, 0).is_err());
        assert!(prefix_suffix(&a, &theta, 6).is_err());
    }

    #[test]
    fn hardware_parameter_counts() {
        let mut rng = RngStream::new(1, 0);
        let a = build_hardware_efficient(4, 1, HardwareVariant::CphaseLadder, &mut rng).unwrap();
        assert_eq!(a.num_layers(), 4 + 3);
        let b = build_hardware_efficient(3, 2, HardwareVariant::CnotSu2, &mut rng).unwrap();
        assert_eq!(b.num_layers(), 2 * 9);
        assert!(matches!(
            build_hardware_efficient(1, 1, HardwareVariant::CnotSu2, &mut rng),
            Err(Error::TooFewQubits(1))
        ));
    }

    #[test]
    fn cnot_su2_structure() {
        let mut rng = RngStream::new(2, 0);
        let a = build_hardware_efficient(2, 1, HardwareVariant::CnotSu2, &mut rng).unwrap();
        let u0 = circuit_unitary(&a, &ParameterVector::zeros(6)).unwrap();
        assert!(u0.max_abs_diff(&cnot(2, 0, 1)) < 1e-15);

        let theta = ParameterVector::uniform(6, &mut rng);
        let t = theta.as_slice();
        // single-qubit Z-Y-Z products, qubit 0 then qubit 1
        let q0 = &pauli_rotation(&"ZI".parse().unwrap(), t[2])
            * &(&pauli_rotation(&"YI".parse().unwrap(), t[1]) * &pauli_rotation(&"ZI".parse().unwrap(), t[0]));
        let q1 = &pauli_rotation(&"IZ".parse().unwrap(), t[5])
            * &(&pauli_rotation(&"IY".parse().unwrap(), t[4]) * &pauli_rotation(&"IZ".parse().unwrap(), t[3]));
        let expected = &cnot(2, 0, 1) * &(&q1 * &q0);
        let u = circuit_unitary(&a, &theta).unwrap();
        assert!(u.max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn cnot_chain_on_basis_states() {
        // |100⟩ → CNOT(0,1) → |110⟩ → CNOT(1,2) → |111⟩
        let chain = cnot_chain(3);
        let out = chain.apply(&Statevector::basis(3, 0b100));
        assert_eq!(out, Statevector::basis(3, 0b111));
    }

    #[test]
    fn hardware_initial_state_amplitudes() {
        let s = hardware_initial_state(1);
        let dense = pauli_rotation(&"Y".parse().unwrap(), -FRAC_PI_8).apply(&Statevector::zero_state(1));
        for (a, b) in s.amplitudes().iter().zip(dense.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
