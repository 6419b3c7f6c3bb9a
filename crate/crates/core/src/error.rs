// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter vector has length {found}, ansatz has {expected} layers")]
    ParameterCount { expected: usize, found: usize },

    #[error("layer index {index} out of range 1..={layers}")]
    LayerOutOfRange { index: usize, layers: usize },

    #[error("expectation value has imaginary residue {0:e}")]
    ImaginaryResidue(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("invalid pauli string {0:?}")]
    InvalidPauli(String),

    #[error("operator is not traceless (trace {0:e})")]
    NotTraceless(f64),

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("training set of size {size} exceeds Hilbert dimension {dim}")]
    TrainingSetTooLarge { size: usize, dim: usize },

    #[error("training index {index} out of range for {len} data points")]
    TrainingIndex { index: usize, len: usize },

    #[error("hardware-efficient ansatz needs at least 2 qubits, got {0}")]
    TooFewQubits(usize),

    #[error("gradient descent diverged at step {step}")]
    Divergence { step: usize },

    #[error("only {found} points above the floor, need at least {needed}")]
    InsufficientPoints { found: usize, needed: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
