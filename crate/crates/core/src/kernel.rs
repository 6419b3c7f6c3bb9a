// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Residual error, exact derivatives, the tangent kernel and the meta-kernel.
//!
//! With layer 1 acting first, write `φ_ℓ` for the state right after the
//! rotation of layer `ℓ` and `Õ_ℓ` for the observable pulled back to that
//! point. Then
//!
//! ```text
//! ∂ε/∂θ_ℓ        = −i ⟨φ_ℓ| [X_ℓ, Õ_ℓ] |φ_ℓ⟩
//! ∂²ε/∂θ_a∂θ_b   = −⟨φ_a| [X_a, M† [X_b, Õ_b] M] |φ_a⟩      (a ≤ b)
//! ```
//!
//! where `M` carries the point after rotation `a` to the point after rotation
//! `b`. Gradients are evaluated with one backward sweep over statevectors;
//! the Hessian pulls dense commutators back layer by layer.

use nalgebra::DMatrix;

use crate::circuit::{evolve, AnsatzSpec, ParameterVector};
use crate::error::{Error, Result};
use crate::linalg::{real_part, ComplexMatrix, Statevector, C64};
use crate::observable::Observable;
use crate::pauli::{pauli_matrix, pauli_rotation};

fn check_observable(ansatz: &AnsatzSpec, obs: &Observable) -> Result<()> {
    if obs.dim() != ansatz.dim() {
        return Err(Error::DimensionMismatch { expected: ansatz.dim(), found: obs.dim() });
    }
    Ok(())
}

/// `⟨φ|U†(θ) O U(θ)|φ⟩`.
pub fn model_output(ansatz: &AnsatzSpec, theta: &ParameterVector, obs: &Observable, phi: &Statevector) -> Result<f64> {
    check_observable(ansatz, obs)?;
    evolve(ansatz, theta, phi)?.expectation(obs.matrix())
}

/// `ε = ⟨Ψ₀|U†(θ) O U(θ)|Ψ₀⟩ − O₀`.
pub fn residual_error(
    ansatz: &AnsatzSpec,
    theta: &ParameterVector,
    obs: &Observable,
    psi0: &Statevector,
) -> Result<f64> {
    Ok(model_output(ansatz, theta, obs, psi0)? - obs.target())
}

/// Expectation `⟨φ|U† O U|φ⟩` together with its gradient, from a single
/// forward pass and a single backward sweep.
pub fn output_and_gradient(
    ansatz: &AnsatzSpec,
    theta: &ParameterVector,
    obs: &Observable,
    phi: &Statevector,
) -> Result<(f64, Vec<f64>)> {
    check_observable(ansatz, obs)?;
    let mut psi = evolve(ansatz, theta, phi)?;
    let mut lam = obs.matrix().apply(&psi);
    let value = real_part(psi.inner(&lam))?;

    let mut grad = vec![0.0; ansatz.num_layers()];
    for (k, layer) in ansatz.layers().iter().enumerate().rev() {
        layer.fixed.apply_adjoint(&mut psi);
        layer.fixed.apply_adjoint(&mut lam);
        // psi = φ_k, lam = Õ_k φ_k;  −i⟨φ|[X, Õ]|φ⟩ = 2 Im⟨Xφ|Õφ⟩
        let x_phi = layer.generator.apply(&psi);
        grad[k] = 2.0 * x_phi.inner(&lam).im;
        let t = theta.as_slice()[k];
        layer.generator.rotate(-t, &mut psi);
        layer.generator.rotate(-t, &mut lam);
    }
    Ok((value, grad))
}

/// `∂ε/∂θ_ℓ` for every layer.
pub fn gradient(
    ansatz: &AnsatzSpec,
    theta: &ParameterVector,
    obs: &Observable,
    psi0: &Statevector,
) -> Result<Vec<f64>> {
    output_and_gradient(ansatz, theta, obs, psi0).map(|(_, g)| g)
}

/// `K = Σ_ℓ (∂ε/∂θ_ℓ)²`.
pub fn qntk(grad: &[f64]) -> f64 {
    grad.iter().map(|g| g * g).sum()
}

/// `⟨φ|[X, C]|φ⟩` for a Pauli generator `X`.
fn commutator_expectation(x: &crate::pauli::PauliString, c: &ComplexMatrix, phi: &Statevector) -> C64 {
    let x_phi = x.apply(phi);
    let c_phi = c.apply(phi);
    let c_x_phi = c.apply(&x_phi);
    x_phi.inner(&c_phi) - phi.inner(&c_x_phi)
}

/// Exact Hessian `∂²ε/∂θ_a∂θ_b` via nested commutators.
pub fn hessian_residual(
    ansatz: &AnsatzSpec,
    theta: &ParameterVector,
    obs: &Observable,
    psi0: &Statevector,
) -> Result<DMatrix<f64>> {
    check_observable(ansatz, obs)?;
    ansatz.check_params(theta)?;
    ansatz.check_state(psi0)?;
    let l = ansatz.num_layers();
    let t = theta.as_slice();
    let layers = ansatz.layers();

    // φ_k: state right after the rotation of layer k
    let mut phis = Vec::with_capacity(l);
    let mut psi = psi0.clone();
    for (k, layer) in layers.iter().enumerate() {
        layer.generator.rotate(t[k], &mut psi);
        phis.push(psi.clone());
        layer.fixed.apply(&mut psi);
    }

    // step[k] carries the point after rotation k to the point after rotation k+1
    let step: Vec<ComplexMatrix> = (0..l.saturating_sub(1))
        .map(|k| &pauli_rotation(&layers[k + 1].generator, t[k + 1]) * &ansatz.fixed_unitary(k))
        .collect();

    // Õ_k, pulled back from the end of the circuit
    let mut pulled = vec![ComplexMatrix::identity(1); l];
    if l > 0 {
        pulled[l - 1] = ansatz.fixed_unitary(l - 1).conjugate(obs.matrix());
        for k in (0..l - 1).rev() {
            pulled[k] = step[k].conjugate(&pulled[k + 1]);
        }
    }

    let mut h = DMatrix::zeros(l, l);
    for b in 0..l {
        let mut c = pauli_matrix(&layers[b].generator).commutator(&pulled[b]);
        let hbb = -commutator_expectation(&layers[b].generator, &c, &phis[b]);
        h[(b, b)] = real_part(hbb)?;
        for a in (0..b).rev() {
            c = step[a].conjugate(&c);
            let hab = real_part(-commutator_expectation(&layers[a].generator, &c, &phis[a]))?;
            h[(a, b)] = hab;
            h[(b, a)] = hab;
        }
    }
    Ok(h)
}

/// `μ = gᵀ H g`.
pub fn meta_kernel(grad: &[f64], hessian: &DMatrix<f64>) -> Result<f64> {
    let l = grad.len();
    if hessian.nrows() != l || hessian.ncols() != l {
        return Err(Error::DimensionMismatch { expected: l, found: hessian.nrows() });
    }
    let mut mu = 0.0;
    for a in 0..l {
        let mut row = 0.0;
        for b in 0..l {
            row += hessian[(a, b)] * grad[b];
        }
        mu += grad[a] * row;
    }
    Ok(mu)
}

/// Labelled data for the supervised loss.
#[derive(Debug, Clone)]
pub struct SupervisedProblem {
    features: Vec<Statevector>,
    labels: Vec<Vec<f64>>,
    observables: Vec<Observable>,
    training_set: Vec<usize>,
}

impl SupervisedProblem {
    /// `labels[δ][i]` is the target for data point `δ` and output `i`.
    pub fn new(
        features: Vec<Statevector>,
        labels: Vec<Vec<f64>>,
        observables: Vec<Observable>,
        training_set: Vec<usize>,
    ) -> Result<Self> {
        if training_set.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if labels.len() != features.len() {
            return Err(Error::DimensionMismatch { expected: features.len(), found: labels.len() });
        }
        if observables.is_empty() {
            return Err(Error::InvalidArgument("no observables".into()));
        }
        let dim = observables[0].dim();
        for o in &observables {
            if o.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: o.dim() });
            }
        }
        for f in &features {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: f.dim() });
            }
            let norm = f.norm();
            if (norm - 1.0).abs() > crate::linalg::NORM_TOL {
                return Err(Error::NotNormalized(norm));
            }
        }
        for row in &labels {
            if row.len() != observables.len() {
                return Err(Error::DimensionMismatch { expected: observables.len(), found: row.len() });
            }
        }
        for &idx in &training_set {
            if idx >= features.len() {
                return Err(Error::TrainingIndex { index: idx, len: features.len() });
            }
        }
        Ok(Self { features, labels, observables, training_set })
    }

    /// Computational-basis features `|δ⟩`, which are mutually orthogonal.
    /// Requires the training set to fit in the Hilbert space.
    pub fn with_basis_features(
        qubits: usize,
        labels: Vec<Vec<f64>>,
        observables: Vec<Observable>,
        training_set: Vec<usize>,
    ) -> Result<Self> {
        let dim = 1usize << qubits;
        if training_set.len() > dim {
            return Err(Error::TrainingSetTooLarge { size: training_set.len(), dim });
        }
        if labels.len() > dim {
            return Err(Error::TrainingSetTooLarge { size: labels.len(), dim });
        }
        let features = (0..labels.len()).map(|d| Statevector::basis(qubits, d)).collect();
        Self::new(features, labels, observables, training_set)
    }

    pub fn features(&self) -> &[Statevector] {
        &self.features
    }

    pub fn labels(&self) -> &[Vec<f64>] {
        &self.labels
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn training_set(&self) -> &[usize] {
        &self.training_set
    }

    pub fn num_outputs(&self) -> usize {
        self.observables.len()
    }

    /// Size of the joint (sample, output) index.
    pub fn joint_len(&self) -> usize {
        self.training_set.len() * self.observables.len()
    }
}

/// Residuals `ε_{δ,i}` and gradients `∂z_{δ,i}/∂θ`, rows in joint order
/// (training sample major, output minor).
#[derive(Debug, Clone)]
pub struct SupervisedJacobian {
    pub residuals: Vec<f64>,
    pub gradients: Vec<Vec<f64>>,
}

pub fn supervised_jacobian(
    ansatz: &AnsatzSpec,
    theta: &ParameterVector,
    prob: &SupervisedProblem,
) -> Result<SupervisedJacobian> {
    let mut residuals = Vec::with_capacity(prob.joint_len());
    let mut gradients = Vec::with_capacity(prob.joint_len());
    for &d in &prob.training_set {
        for (i, obs) in prob.observables.iter().enumerate() {
            let (z, g) = output_and_gradient(ansatz, theta, obs, &prob.features[d])?;
            residuals.push(z - prob.labels[d][i]);
            gradients.push(g);
        }
    }
    Ok(SupervisedJacobian { residuals, gradients })
}

/// Real symmetric kernel over the joint (sample, output) index.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix(DMatrix<f64>);

impl KernelMatrix {
    /// Gram matrix of the given rows.
    pub fn from_gradients(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut k = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..=a {
                let v: f64 = rows[a].iter().zip(&rows[b]).map(|(x, y)| x * y).sum();
                k[(a, b)] = v;
                k[(b, a)] = v;
            }
        }
        Self(k)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `max |K − Kᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.0 - self.0.transpose()).amax()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let sym = (&self.0 + self.0.transpose()) * 0.5;
        let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(f64::NAN)
    }

    /// Entrywise mean with compensated summation, in input order. `None` when
    /// `kernels` is empty or the dimensions differ.
    pub fn mean(kernels: &[KernelMatrix]) -> Option<Self> {
        let dim = kernels.first()?.dim();
        if kernels.iter().any(|k| k.dim() != dim) {
            return None;
        }
        let n = kernels.len() as f64;
        Some(Self(DMatrix::from_fn(dim, dim, |i, j| crate::stats::kahan_sum(kernels.iter().map(|k| k.0[(i, j)])) / n)))
    }
}

/// `K^{i₁i₂}_{δ₁δ₂} = Σ_ℓ ∂z_{i₁;δ₁}/∂θ_ℓ · ∂z_{i₂;δ₂}/∂θ_ℓ` over the training set.
pub fn supervised_kernel(
    ansatz: &AnsatzSpec,
    theta: &ParameterVector,
    prob: &SupervisedProblem,
) -> Result<KernelMatrix> {
    let jac = supervised_jacobian(ansatz, theta, prob)?;
    Ok(KernelMatrix::from_gradients(&jac.gradients))
}
