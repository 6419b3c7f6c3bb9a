// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Desk-scale laboratory for the training dynamics of wide parameterized
//! quantum circuits.
//!
//! The crate simulates layered circuits `U(θ) = ∏ W_ℓ exp(iθ_ℓ X_ℓ)` on dense
//! statevectors, evaluates the quantum neural tangent kernel and meta-kernel
//! exactly, runs plain gradient descent on the residual error, and provides
//! closed-form ensemble predictions together with Monte-Carlo Haar oracles to
//! check them against.

pub mod circuit;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod observable;
pub mod oracle;
pub mod pauli;
pub mod random;
pub mod stats;
pub mod theory;
pub mod training;

pub use circuit::{
    build_hardware_efficient, build_random_ansatz, circuit_unitary, evolve, prefix_suffix, AnsatzFamily, AnsatzSpec,
    HardwareVariant, ParameterVector,
};
pub use error::{Error, Result};
pub use kernel::{
    gradient, hessian_residual, meta_kernel, model_output, qntk, residual_error, supervised_kernel, KernelMatrix,
    SupervisedProblem,
};
pub use linalg::{ComplexMatrix, Statevector, C64};
pub use observable::Observable;
pub use oracle::{MomentEstimate, ResampleMode};
pub use pauli::{pauli_matrix, pauli_rotation, Pauli, PauliString};
pub use random::{haar_unitary, sample_pauli, RngStream};
pub use theory::TheoryInputs;
pub use training::{fit_decay_rate, gd_optimize, gd_supervised, TrainingConfig, Trajectory};
