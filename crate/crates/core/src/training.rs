// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Full-batch gradient descent with per-step recording of the residual error
//! and the tangent kernel.

use sha2::{Digest, Sha256};

use crate::circuit::{AnsatzSpec, ParameterVector};
use crate::error::{Error, Result};
use crate::kernel::{output_and_gradient, qntk, supervised_jacobian, KernelMatrix, SupervisedProblem};
use crate::linalg::Statevector;
use crate::observable::Observable;
use crate::random::RngStream;
use crate::stats::fit_line;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialAngles {
    /// Independent uniform draws in `[0, 2π)` from the configured stream.
    Uniform,
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub steps: usize,
    pub init: InitialAngles,
    pub record_parameters: bool,
    pub seed: u64,
    /// Stream index used for the initial angles.
    pub stream: u64,
}

impl TrainingConfig {
    pub fn new(learning_rate: f64, steps: usize) -> Self {
        Self { learning_rate, steps, init: InitialAngles::Uniform, record_parameters: false, seed: 0, stream: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        Ok(())
    }

    /// SHA-256 of the fields that determine a run.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.learning_rate.to_bits().to_le_bytes());
        h.update((self.steps as u64).to_le_bytes());
        match &self.init {
            InitialAngles::Uniform => h.update([0u8]),
            InitialAngles::Fixed(v) => {
                h.update([1u8]);
                for x in v {
                    h.update(x.to_bits().to_le_bytes());
                }
            }
        }
        h.update([self.record_parameters as u8]);
        h.update(self.seed.to_le_bytes());
        h.update(self.stream.to_le_bytes());
        hex::encode(h.finalize())
    }

    fn initial_parameters(&self, len: usize) -> Result<ParameterVector> {
        match &self.init {
            InitialAngles::Uniform => {
                let mut rng = RngStream::new(self.seed, self.stream);
                Ok(ParameterVector::uniform(len, &mut rng))
            }
            InitialAngles::Fixed(v) if v.len() == len => Ok(ParameterVector::new(v.clone())),
            InitialAngles::Fixed(v) => Err(Error::ParameterCount { expected: len, found: v.len() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub config_hash: String,
    pub ansatz_hash: String,
    pub seed: u64,
    pub stream: u64,
}

/// Time series of a gradient-descent run, `steps + 1` entries each.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `ε(t)` for single-target runs, the loss `ℒ(t)` for supervised runs.
    pub errors: Vec<f64>,
    /// `K(t)`; for supervised runs the mean kernel eigenvalue `Tr K / dim`.
    pub kernel: Vec<f64>,
    /// Per-sample residuals `ε_{δ,i}(t)` in joint order (supervised only).
    pub residuals: Option<Vec<Vec<f64>>>,
    pub params: Option<Vec<Vec<f64>>>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.errors.len().saturating_sub(1)
    }
}

fn meta(ansatz: &AnsatzSpec, cfg: &TrainingConfig) -> TrajectoryMeta {
    TrajectoryMeta { config_hash: cfg.digest(), ansatz_hash: ansatz.digest(), seed: cfg.seed, stream: cfg.stream }
}

/// Gradient descent on `ℒ = ε²/2` with the update `δθ_ℓ = −η ε ∂ε/∂θ_ℓ`.
pub fn gd_optimize(
    ansatz: &AnsatzSpec,
    obs: &Observable,
    psi0: &Statevector,
    cfg: &TrainingConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let mut theta = cfg.initial_parameters(ansatz.num_layers())?;
    let mut errors = Vec::with_capacity(cfg.steps + 1);
    let mut kernel = Vec::with_capacity(cfg.steps + 1);
    let mut params = cfg.record_parameters.then(Vec::new);
    let eta = cfg.learning_rate;

    for t in 0..=cfg.steps {
        let (z, grad) = output_and_gradient(ansatz, &theta, obs, psi0)?;
        let eps = z - obs.target();
        if !eps.is_finite() || theta.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { step: t });
        }
        errors.push(eps);
        kernel.push(qntk(&grad));
        if let Some(p) = params.as_mut() {
            p.push(theta.as_slice().to_vec());
        }
        if t == cfg.steps {
            break;
        }
        for (x, g) in theta.as_mut_slice().iter_mut().zip(&grad) {
            *x -= eta * (eps * g);
        }
    }
    Ok(Trajectory { errors, kernel, residuals: None, params, meta: meta(ansatz, cfg) })
}

/// Gradient descent on the supervised loss `ℒ = ½ Σ ε²_{δ,i}` with
/// `δθ_ℓ = −η Σ ε_{δ,i} ∂z_{δ,i}/∂θ_ℓ`.
pub fn gd_supervised(ansatz: &AnsatzSpec, prob: &SupervisedProblem, cfg: &TrainingConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let mut theta = cfg.initial_parameters(ansatz.num_layers())?;
    let mut errors = Vec::with_capacity(cfg.steps + 1);
    let mut kernel = Vec::with_capacity(cfg.steps + 1);
    let mut residuals = Vec::with_capacity(cfg.steps + 1);
    let mut params = cfg.record_parameters.then(Vec::new);
    let eta = cfg.learning_rate;

    for t in 0..=cfg.steps {
        let jac = supervised_jacobian(ansatz, &theta, prob)?;
        if jac.residuals.iter().any(|e| !e.is_finite()) || theta.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { step: t });
        }
        let loss = 0.5 * jac.residuals.iter().map(|e| e * e).sum::<f64>();
        let k = KernelMatrix::from_gradients(&jac.gradients);
        errors.push(loss);
        kernel.push(k.trace() / k.dim() as f64);
        if let Some(p) = params.as_mut() {
            p.push(theta.as_slice().to_vec());
        }
        if t == cfg.steps {
            residuals.push(jac.residuals);
            break;
        }
        let mut step = vec![0.0; theta.len()];
        for (eps, grad) in jac.residuals.iter().zip(&jac.gradients) {
            for (s, g) in step.iter_mut().zip(grad) {
                *s += eps * g;
            }
        }
        residuals.push(jac.residuals);
        for (x, s) in theta.as_mut_slice().iter_mut().zip(&step) {
            *x -= eta * s;
        }
    }
    Ok(Trajectory { errors, kernel, residuals: Some(residuals), params, meta: meta(ansatz, cfg) })
}

/// Fitted exponential decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// `−slope` of `ln|ε(t)|` against `t`.
    pub gamma: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub const DEFAULT_BURN_IN: usize = 0;
pub const DEFAULT_FLOOR: f64 = 1e-12;
pub const MIN_FIT_POINTS: usize = 10;

/// Least-squares fit of `ln|ε(t)|` over steps `t ≥ burn_in` with
/// `|ε(t)| > floor`.
pub fn fit_decay_rate(traj: &Trajectory, burn_in: usize, floor: f64) -> Result<DecayFit> {
    fit_decay_series(&traj.errors, burn_in, floor)
}

pub fn fit_decay_series(errors: &[f64], burn_in: usize, floor: f64) -> Result<DecayFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = errors
        .iter()
        .enumerate()
        .skip(burn_in)
        .filter(|(_, e)| e.abs() > floor && e.is_finite())
        .map(|(t, e)| (t as f64, e.abs().ln()))
        .unzip();
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints { found: xs.len(), needed: MIN_FIT_POINTS });
    }
    let fit = fit_line(&xs, &ys).ok_or(Error::InsufficientPoints { found: xs.len(), needed: MIN_FIT_POINTS })?;
    Ok(DecayFit { gamma: -fit.slope, r_squared: fit.r_squared, points: xs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let e: Vec<f64> = (0..200).map(|t| (-0.01 * t as f64).exp()).collect();
        let fit = fit_decay_series(&e, 0, 1e-12).unwrap();
        assert!((fit.gamma - 0.01).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frozen_kernel_closed_form() {
        let e: Vec<f64> = (0..500).map(|t| 0.7 * (1.0f64 - 0.001).powi(t)).collect();
        let fit = fit_decay_series(&e, 0, 1e-12).unwrap();
        assert!((fit.gamma + (1.0f64 - 0.001).ln()).abs() < 1e-12);
        assert!((fit.gamma - 0.0010005).abs() < 1e-7);
    }

    #[test]
    fn sign_is_ignored_and_floor_applies() {
        let e: Vec<f64> = (0..50).map(|t| -(-0.05 * t as f64).exp()).collect();
        let fit = fit_decay_series(&e, 5, 1e-12).unwrap();
        assert!((fit.gamma - 0.05).abs() < 1e-10);
        assert_eq!(fit.points, 45);
        let tiny = vec![1e-13; 40];
        assert!(matches!(fit_decay_series(&tiny, 0, 1e-12), Err(Error::InsufficientPoints { found: 0, .. })));
    }

    #[test]
    fn config_validation() {
        assert!(TrainingConfig::new(0.0, 10).validate().is_err());
        assert!(TrainingConfig::new(1e-3, 0).validate().is_err());
        assert!(TrainingConfig::new(1e-3, 1).validate().is_ok());
    }
}
