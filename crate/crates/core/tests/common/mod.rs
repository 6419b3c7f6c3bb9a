// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use qntk_core::{
    build_random_ansatz, circuit_unitary, pauli_matrix, prefix_suffix, AnsatzSpec, ComplexMatrix, Observable,
    ParameterVector, RngStream, Statevector, C64,
};

pub struct Config {
    pub ansatz: AnsatzSpec,
    pub theta: ParameterVector,
    pub obs: Observable,
    pub psi0: Statevector,
}

/// Random ansatz, uniform angles, a random 10-term observable and `|0…0⟩`.
pub fn random_config(qubits: usize, layers: usize, rng: &mut RngStream) -> Config {
    let ansatz = build_random_ansatz(qubits, layers, true, rng);
    let theta = ParameterVector::uniform(layers, rng);
    let obs = Observable::random_pauli_sum(qubits, 10, (0.0, 1.0), 0.0, rng).unwrap();
    Config { ansatz, theta, obs, psi0: Statevector::zero_state(qubits) }
}

/// `⟨ψ|U†OU|ψ⟩ − O₀` from the dense circuit unitary.
pub fn dense_residual(c: &Config, theta: &ParameterVector) -> f64 {
    let u = circuit_unitary(&c.ansatz, theta).unwrap();
    let rho = c.psi0.density_matrix();
    let o_h = u.conjugate(c.obs.matrix());
    (&rho * &o_h).trace().re - c.obs.target()
}

/// Gradient from `∂U/∂θ_ℓ = i·V₊ (W_ℓ X_ℓ W_ℓ†) V₋`.
pub fn dense_gradient(c: &Config) -> Vec<f64> {
    let u = circuit_unitary(&c.ansatz, &c.theta).unwrap();
    let psi = u.apply(&c.psi0);
    let o_psi = c.obs.matrix().apply(&psi);
    (1..=c.ansatz.num_layers())
        .map(|ell| {
            let (vm, vp) = prefix_suffix(&c.ansatz, &c.theta, ell).unwrap();
            let w = c.ansatz.fixed_unitary(ell - 1);
            let x = pauli_matrix(c.ansatz.generator(ell - 1));
            let wxw = &(&w * &x) * &w.adjoint();
            let du = (&(&vp * &wxw) * &vm).scale(C64::new(0.0, 1.0));
            let dpsi = du.apply(&c.psi0);
            2.0 * o_psi.inner(&dpsi).re
        })
        .collect()
}

/// `exp(iθ H)` for Hermitian `H` by eigendecomposition.
pub fn dense_exp_i(h: &ComplexMatrix, theta: f64) -> ComplexMatrix {
    let eig = h.inner().clone().symmetric_eigen();
    let phases: Vec<C64> = eig.eigenvalues.iter().map(|&lam| C64::from_polar(1.0, theta * lam)).collect();
    let v = ComplexMatrix::from_inner(eig.eigenvectors);
    let d = ComplexMatrix::from_diagonal(&phases);
    &(&v * &d) * &v.adjoint()
}

pub fn with_angle(theta: &ParameterVector, k: usize, value: f64) -> ParameterVector {
    let mut t = theta.clone();
    t.as_mut_slice()[k] = value;
    t
}
