// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Experiment runners.
//!
//! Stream layout for a master seed `s`:
//! - random observable: `RngStream(s, u64::MAX)`;
//! - `qntk-stats`, entry `j` of the layer list: base `RngStream(s, j)`, sample
//!   `k` from `base.substream(k)`;
//! - training runs, trial `k`: initial angles from `RngStream(s, k)`, ansatz
//!   from `RngStream(s, k).substream(0)`, labels from `.substream(1)`; the
//!   shared ansatz of angle mode comes from `RngStream(s, u64::MAX − 1)`;
//! - `eigen-scan`, size `a`, trial `k`: `RngStream(s, a).substream(k)`;
//! - `haar-check`: `RngStream(s, 0)`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qntk_core::circuit::hardware_initial_state;
use qntk_core::oracle::{haar_suite, sample_kernels, KernelEnsemble, MomentEstimate};
use qntk_core::stats::{fit_line, kahan_sum, summarize};
use qntk_core::theory::{
    concentration, delta_k, delta_mu, gamma, kbar_exact, kbar_leading, kernel_eigenvalues, supervised_kbar,
    DEFAULT_CONCENTRATION_THRESHOLD,
};
use qntk_core::training::{fit_decay_series, InitialAngles, DEFAULT_BURN_IN, DEFAULT_FLOOR};
use qntk_core::{
    build_hardware_efficient, build_random_ansatz, supervised_kernel, AnsatzSpec, KernelMatrix, Observable,
    ParameterVector, RngStream, Statevector, SupervisedProblem, TheoryInputs, TrainingConfig, Trajectory,
};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, ModeSpec};
use crate::output::{num, write_json, Csv, ObservableRecord, TOOL_VERSION};

/// Outcome class of a run, mapped to the process exit code by the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    ChecksFailed,
    AllDiverged,
}

/// Stream index of the shared ansatz in angle-mode training.
pub const SHARED_ANSATZ_STREAM: u64 = u64::MAX - 1;

/// Runs `cfg` on a pool of `threads` workers (all cores when `None`) and
/// writes every artifact into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<Status> {
    cfg.validate().map_err(|e| anyhow::anyhow!("invalid config: {e}"))?;
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build().context("building thread pool")?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("config.echo.json"), cfg.echo())?;
    pool.install(|| match cfg.experiment {
        ExperimentKind::QntkStats => qntk_stats(cfg)?.write(cfg, out),
        ExperimentKind::Train => train(cfg)?.write_train(cfg, out),
        ExperimentKind::DecayFit => train(cfg)?.write_decay_fit(cfg, out),
        ExperimentKind::TrainSupervised => train_supervised(cfg)?.write(cfg, out),
        ExperimentKind::EigenScan => eigen_scan(cfg)?.write(cfg, out),
        ExperimentKind::HaarCheck => haar_check(cfg)?.write(cfg, out),
    })
}

fn write_observable(obs: &Observable, out: &Path) -> Result<()> {
    write_json(&out.join("observable.json"), &ObservableRecord::from(obs))?;
    Ok(())
}

/// Theory inputs with identity generators discounted when they are allowed.
fn theory_inputs(cfg: &ExperimentConfig, obs: &Observable, params: usize, eta: f64) -> TheoryInputs {
    let mut inp = TheoryInputs::from_observable(obs, params, eta);
    if !cfg.exclude_identity && cfg.ansatz.hardware_variant().is_none() {
        inp.sum_tr_x2 *= 1.0 - 0.25f64.powi(cfg.qubits as i32);
    }
    inp
}

#[derive(Debug, Clone, Serialize)]
struct Provenance {
    tool_version: &'static str,
    config_sha256: String,
    experiment: &'static str,
    seed: u64,
}

fn provenance(cfg: &ExperimentConfig) -> Provenance {
    Provenance {
        tool_version: TOOL_VERSION,
        config_sha256: cfg.digest(),
        experiment: cfg.experiment.tag(),
        seed: cfg.seed,
    }
}

// ---------------------------------------------------------------- qntk-stats

#[derive(Debug, Clone, Serialize)]
pub struct StatsRow {
    pub layers: usize,
    pub samples: usize,
    pub mean_k: f64,
    pub std_k: f64,
    pub std_err_k: f64,
    pub kbar_exact: f64,
    pub kbar_leading: f64,
    pub delta_k: f64,
    /// Empirical `ΔK/K̄`.
    pub ratio: f64,
    /// Leading-order `ΔK/K̄`.
    pub ratio_theory: f64,
    pub z_score: f64,
    pub mean_mu: Option<f64>,
    pub std_mu: Option<f64>,
    pub std_err_mu: Option<f64>,
    pub delta_mu: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsSample {
    pub layers: usize,
    pub sample: usize,
    pub k: f64,
    pub mu: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct StatsResult {
    pub observable: Observable,
    pub rows: Vec<StatsRow>,
    pub samples: Vec<StatsSample>,
    /// Least-squares slope of `ln(ΔK/K̄)` against `ln L` over entries with
    /// `L ≥ 1`, when at least two exist.
    pub ratio_slope: Option<f64>,
}

pub fn qntk_stats(cfg: &ExperimentConfig) -> Result<StatsResult> {
    let obs = cfg.build_observable()?;
    let psi0 = Statevector::zero_state(cfg.qubits);
    let samples = cfg.samples.unwrap_or(0);
    let mut rows = Vec::new();
    let mut raw = Vec::new();
    for (j, layers) in cfg.layers.as_ref().map(|l| l.values()).unwrap_or_default().into_iter().enumerate() {
        let ens = KernelEnsemble {
            qubits: cfg.qubits,
            layers,
            samples,
            mode: cfg.mode.into(),
            exclude_identity: cfg.exclude_identity,
            meta_kernel: cfg.meta_kernel,
        };
        let draws = sample_kernels(&ens, &obs, &psi0, &RngStream::new(cfg.seed, j as u64))?;
        let ks: Vec<f64> = draws.iter().map(|s| s.k).collect();
        let inp = theory_inputs(cfg, &obs, layers, 0.0);
        let exact = kbar_exact(&inp);
        let est = MomentEstimate::from_samples(&ks, exact);
        let mus: Vec<f64> = draws.iter().filter_map(|s| s.mu).collect();
        let mu = (!mus.is_empty()).then(|| summarize(&mus));
        rows.push(StatsRow {
            layers,
            samples,
            mean_k: est.mean,
            std_k: est.std_dev,
            std_err_k: est.std_err,
            kbar_exact: exact,
            kbar_leading: kbar_leading(&inp),
            delta_k: delta_k(&inp),
            ratio: est.std_dev / est.mean,
            ratio_theory: delta_k(&inp) / exact,
            z_score: est.z_score,
            mean_mu: mu.map(|m| m.mean),
            std_mu: mu.map(|m| m.std_dev),
            std_err_mu: mu.map(|m| m.std_err),
            delta_mu: delta_mu(&inp).eta_free,
        });
        raw.extend(draws.iter().enumerate().map(|(k, s)| StatsSample {
            layers,
            sample: k,
            k: s.k,
            mu: s.mu,
            residual: s.residual,
        }));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.layers >= 1 && r.ratio.is_finite() && r.ratio > 0.0)
        .map(|r| ((r.layers as f64).ln(), r.ratio.ln()))
        .unzip();
    let ratio_slope = fit_line(&xs, &ys).map(|f| f.slope);
    Ok(StatsResult { observable: obs, rows, samples: raw, ratio_slope })
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl StatsResult {
    fn write(&self, cfg: &ExperimentConfig, out: &Path) -> Result<Status> {
        let hash = cfg.digest();
        let mut summary = Csv::new(
            &hash,
            &[
                "layers",
                "samples",
                "mean_k",
                "std_k",
                "std_err_k",
                "kbar_exact",
                "kbar_leading",
                "delta_k_theory",
                "ratio",
                "ratio_theory",
                "z_score",
                "mean_mu",
                "std_mu",
                "std_err_mu",
                "delta_mu_theory",
            ],
        );
        for r in &self.rows {
            summary.row(&[
                r.layers.to_string(),
                r.samples.to_string(),
                num(r.mean_k),
                num(r.std_k),
                num(r.std_err_k),
                num(r.kbar_exact),
                num(r.kbar_leading),
                num(r.delta_k),
                num(r.ratio),
                num(r.ratio_theory),
                num(r.z_score),
                opt(r.mean_mu),
                opt(r.std_mu),
                opt(r.std_err_mu),
                num(r.delta_mu),
            ]);
        }
        summary.write(&out.join("summary.csv"))?;
        let mut samples = Csv::new(&hash, &["layers", "sample", "k", "mu", "residual"]);
        for s in &self.samples {
            samples.row(&[s.layers.to_string(), s.sample.to_string(), num(s.k), opt(s.mu), num(s.residual)]);
        }
        samples.write(&out.join("samples.csv"))?;
        write_observable(&self.observable, out)?;

        #[derive(Serialize)]
        struct Report<'a> {
            provenance: Provenance,
            mode: &'static str,
            rows: &'a [StatsRow],
            ratio_slope: Option<f64>,
        }
        write_json(
            &out.join("report.json"),
            &Report {
                provenance: provenance(cfg),
                mode: qntk_core::ResampleMode::from(cfg.mode).tag(),
                rows: &self.rows,
                ratio_slope: self.ratio_slope,
            },
        )?;
        Ok(Status::Success)
    }
}

// ------------------------------------------------------------------ training

fn build_ansatz(cfg: &ExperimentConfig, layers: usize, rng: &mut RngStream) -> Result<AnsatzSpec> {
    Ok(match cfg.ansatz.hardware_variant() {
        Some(v) => build_hardware_efficient(cfg.qubits, layers, v, rng)?,
        None => build_random_ansatz(cfg.qubits, layers, cfg.exclude_identity, rng),
    })
}

fn initial_state(cfg: &ExperimentConfig) -> Statevector {
    match cfg.ansatz.hardware_variant() {
        Some(_) => hardware_initial_state(cfg.qubits),
        None => Statevector::zero_state(cfg.qubits),
    }
}

/// The ansatz of trial `k`: fresh per trial in instance mode, shared in angle
/// mode.
fn trial_ansatz(cfg: &ExperimentConfig, shared: Option<&AnsatzSpec>, k: usize) -> Result<AnsatzSpec> {
    match shared {
        Some(a) => Ok(a.clone()),
        None => build_ansatz(cfg, cfg.layer_count(), &mut RngStream::new(cfg.seed, k as u64).substream(0)),
    }
}

fn shared_ansatz(cfg: &ExperimentConfig) -> Result<Option<AnsatzSpec>> {
    match cfg.mode {
        ModeSpec::Angle => {
            Ok(Some(build_ansatz(cfg, cfg.layer_count(), &mut RngStream::new(cfg.seed, SHARED_ANSATZ_STREAM))?))
        }
        ModeSpec::Instance => Ok(None),
    }
}

fn training_config(cfg: &ExperimentConfig, k: usize) -> TrainingConfig {
    TrainingConfig {
        learning_rate: cfg.learning_rate.unwrap_or(0.0),
        steps: cfg.steps.unwrap_or(0),
        init: InitialAngles::Uniform,
        record_parameters: false,
        seed: cfg.seed,
        stream: k as u64,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRecord {
    pub gamma: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: usize,
    pub parameters: usize,
    pub trajectory: Option<Trajectory>,
    pub error: Option<String>,
    pub fit: Option<FitRecord>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainTheory {
    pub parameters: usize,
    pub kbar_exact: f64,
    pub kbar_leading: f64,
    pub gamma_exact: f64,
    pub gamma_leading: f64,
    pub delta_k: f64,
    pub concentration_ratio_k: Option<f64>,
    pub concentration_ratio_mu: Option<f64>,
    pub analytic_regime: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub observable: Observable,
    pub trials: Vec<TrialOutcome>,
    pub theory: TrainTheory,
}

fn fit_of(errors: &[f64], cfg: &ExperimentConfig) -> (Option<FitRecord>, Option<String>) {
    match fit_decay_series(errors, cfg.burn_in.unwrap_or(DEFAULT_BURN_IN), cfg.floor.unwrap_or(DEFAULT_FLOOR)) {
        Ok(f) => (Some(FitRecord { gamma: f.gamma, r_squared: f.r_squared, points: f.points }), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

pub fn train(cfg: &ExperimentConfig) -> Result<TrainResult> {
    let obs = cfg.build_observable()?;
    let psi0 = initial_state(cfg);
    let shared = shared_ansatz(cfg)?;
    let trials: Vec<TrialOutcome> = (0..cfg.trials.unwrap_or(0))
        .into_par_iter()
        .map(|k| -> Result<TrialOutcome> {
            let ansatz = trial_ansatz(cfg, shared.as_ref(), k)?;
            let parameters = ansatz.num_layers();
            Ok(match qntk_core::gd_optimize(&ansatz, &obs, &psi0, &training_config(cfg, k)) {
                Ok(t) => {
                    let (fit, fit_error) = fit_of(&t.errors, cfg);
                    TrialOutcome { trial: k, parameters, trajectory: Some(t), error: None, fit, fit_error }
                }
                Err(e) => TrialOutcome {
                    trial: k,
                    parameters,
                    trajectory: None,
                    error: Some(e.to_string()),
                    fit: None,
                    fit_error: None,
                },
            })
        })
        .collect::<Result<_>>()?;
    let parameters = trials.first().map(|t| t.parameters).unwrap_or(0);
    let eta = cfg.learning_rate.unwrap_or(0.0);
    let inp = theory_inputs(cfg, &obs, parameters, eta);
    let g = gamma(&inp);
    let conc = concentration(&inp, DEFAULT_CONCENTRATION_THRESHOLD).ok();
    Ok(TrainResult {
        observable: obs,
        trials,
        theory: TrainTheory {
            parameters,
            kbar_exact: kbar_exact(&inp),
            kbar_leading: kbar_leading(&inp),
            gamma_exact: g.exact,
            gamma_leading: g.leading,
            delta_k: delta_k(&inp),
            concentration_ratio_k: conc.map(|c| c.ratio_k),
            concentration_ratio_mu: conc.map(|c| c.ratio_mu),
            analytic_regime: conc.map(|c| c.analytic_regime),
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub diverged: Option<String>,
    pub fit: Option<FitRecord>,
    pub fit_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub trials: usize,
    pub diverged: usize,
    pub fitted: usize,
    pub mean_gamma: Option<f64>,
    pub std_err_gamma: Option<f64>,
    pub good_fits: usize,
    pub r_squared_threshold: f64,
    pub ratio_to_exact: Option<f64>,
    pub ratio_to_leading: Option<f64>,
}

pub const R_SQUARED_THRESHOLD: f64 = 0.99;

impl TrainResult {
    pub fn fit_summary(&self) -> FitSummary {
        let gammas: Vec<f64> = self.trials.iter().filter_map(|t| t.fit.as_ref().map(|f| f.gamma)).collect();
        let s = (!gammas.is_empty()).then(|| summarize(&gammas));
        FitSummary {
            trials: self.trials.len(),
            diverged: self.trials.iter().filter(|t| t.error.is_some()).count(),
            fitted: gammas.len(),
            mean_gamma: s.map(|s| s.mean),
            std_err_gamma: s.map(|s| s.std_err),
            good_fits: self
                .trials
                .iter()
                .filter(|t| t.fit.as_ref().is_some_and(|f| f.r_squared > R_SQUARED_THRESHOLD))
                .count(),
            r_squared_threshold: R_SQUARED_THRESHOLD,
            ratio_to_exact: s.map(|s| s.mean / self.theory.gamma_exact),
            ratio_to_leading: s.map(|s| s.mean / self.theory.gamma_leading),
        }
    }

    fn status(&self) -> Status {
        if !self.trials.is_empty() && self.trials.iter().all(|t| t.error.is_some()) {
            Status::AllDiverged
        } else {
            Status::Success
        }
    }

    fn write_trials(&self, cfg: &ExperimentConfig, out: &Path) -> Result<()> {
        let dir = out.join("trials");
        fs::create_dir_all(&dir)?;
        let hash = cfg.digest();
        for t in &self.trials {
            let mut csv = Csv::new(&hash, &["t", "epsilon", "kernel"]);
            if let Some(traj) = &t.trajectory {
                for (s, (e, k)) in traj.errors.iter().zip(&traj.kernel).enumerate() {
                    csv.row(&[s.to_string(), num(*e), num(*k)]);
                }
            }
            csv.write(&dir.join(format!("trial_{}.csv", t.trial)))?;
        }
        Ok(())
    }

    fn write_report(&self, cfg: &ExperimentConfig, out: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Report<'a> {
            provenance: Provenance,
            theory: &'a TrainTheory,
            summary: FitSummary,
            trials: Vec<TrialRecord>,
        }
        write_json(
            &out.join("report.json"),
            &Report {
                provenance: provenance(cfg),
                theory: &self.theory,
                summary: self.fit_summary(),
                trials: self
                    .trials
                    .iter()
                    .map(|t| TrialRecord {
                        trial: t.trial,
                        diverged: t.error.clone(),
                        fit: t.fit.clone(),
                        fit_error: t.fit_error.clone(),
                    })
                    .collect(),
            },
        )?;
        Ok(())
    }

    /// Per-step ensemble curves: mean of `ln|ε|`, `ln` of mean `|ε|`, mean
    /// `K`, and straight-line predictions from the mean initial log error.
    fn write_train(&self, cfg: &ExperimentConfig, out: &Path) -> Result<Status> {
        self.write_trials(cfg, out)?;
        let floor = cfg.floor.unwrap_or(DEFAULT_FLOOR);
        let done: Vec<&Trajectory> = self.trials.iter().filter_map(|t| t.trajectory.as_ref()).collect();
        let mut csv = Csv::new(
            &cfg.digest(),
            &[
                "t",
                "trials",
                "mean_log_abs_epsilon",
                "log_mean_abs_epsilon",
                "mean_kernel",
                "predicted_log_exact",
                "predicted_log_leading",
            ],
        );
        let steps = cfg.steps.unwrap_or(0);
        let mean_log = |s: usize| kahan_sum(done.iter().map(|t| t.errors[s].abs().max(floor).ln())) / done.len() as f64;
        let start = if done.is_empty() { f64::NAN } else { mean_log(0) };
        for s in 0..=steps {
            if done.is_empty() {
                break;
            }
            let n = done.len() as f64;
            let mean_abs = kahan_sum(done.iter().map(|t| t.errors[s].abs())) / n;
            let mean_k = kahan_sum(done.iter().map(|t| t.kernel[s])) / n;
            csv.row(&[
                s.to_string(),
                done.len().to_string(),
                num(mean_log(s)),
                num(mean_abs.max(floor).ln()),
                num(mean_k),
                num(start - self.theory.gamma_exact * s as f64),
                num(start - self.theory.gamma_leading * s as f64),
            ]);
        }
        csv.write(&out.join("summary.csv"))?;
        write_observable(&self.observable, out)?;
        self.write_report(cfg, out)?;
        Ok(self.status())
    }

    /// One row per trial with its fitted decay rate.
    fn write_decay_fit(&self, cfg: &ExperimentConfig, out: &Path) -> Result<Status> {
        self.write_trials(cfg, out)?;
        let mut csv = Csv::new(
            &cfg.digest(),
            &["trial", "diverged", "gamma_fit", "r_squared", "points", "gamma_exact", "gamma_leading", "ratio_exact"],
        );
        for t in &self.trials {
            let f = t.fit.as_ref();
            csv.row(&[
                t.trial.to_string(),
                t.error.is_some().to_string(),
                opt(f.map(|f| f.gamma)),
                opt(f.map(|f| f.r_squared)),
                f.map(|f| f.points.to_string()).unwrap_or_default(),
                num(self.theory.gamma_exact),
                num(self.theory.gamma_leading),
                opt(f.map(|f| f.gamma / self.theory.gamma_exact)),
            ]);
        }
        csv.write(&out.join("summary.csv"))?;
        write_observable(&self.observable, out)?;
        self.write_report(cfg, out)?;
        Ok(self.status())
    }
}

// -------------------------------------------------------- train-supervised

#[derive(Debug, Clone)]
pub struct SupervisedTrial {
    pub trial: usize,
    pub trajectory: Option<Trajectory>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupervisedTheory {
    pub mean_eigenvalue_exact: f64,
    pub mean_eigenvalue_leading: f64,
    pub off_diagonal_exact: f64,
    pub bulk_eigenvalue: f64,
    pub lowest_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct SupervisedResult {
    pub observable: Observable,
    pub trials: Vec<SupervisedTrial>,
    pub theory: SupervisedTheory,
}

pub fn train_supervised(cfg: &ExperimentConfig) -> Result<SupervisedResult> {
    let obs = cfg.build_observable()?;
    let size = cfg.set_size.unwrap_or(0);
    let [lo, hi] = cfg.labels();
    let shared = shared_ansatz(cfg)?;
    let trials = (0..cfg.trials.unwrap_or(0))
        .into_par_iter()
        .map(|k| -> Result<SupervisedTrial> {
            let ansatz = trial_ansatz(cfg, shared.as_ref(), k)?;
            let mut lrng = RngStream::new(cfg.seed, k as u64).substream(1);
            let labels: Vec<Vec<f64>> = (0..size).map(|_| vec![lo + (hi - lo) * rand_unit(&mut lrng)]).collect();
            let prob =
                SupervisedProblem::with_basis_features(cfg.qubits, labels, vec![obs.clone()], (0..size).collect())?;
            Ok(match qntk_core::gd_supervised(&ansatz, &prob, &training_config(cfg, k)) {
                Ok(t) => SupervisedTrial { trial: k, trajectory: Some(t), error: None },
                Err(e) => SupervisedTrial { trial: k, trajectory: None, error: Some(e.to_string()) },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let inp = theory_inputs(cfg, &obs, cfg.layer_count(), cfg.learning_rate.unwrap_or(0.0));
    let (tr, tr2) = (obs.trace_moment(1), obs.trace_moment(2));
    let diag = supervised_kbar(&inp, 1.0, tr2, tr, tr)?;
    let off = supervised_kbar(&inp, 0.0, tr2, tr, tr)?;
    let spec = kernel_eigenvalues(cfg.dim(), cfg.layer_count(), size, tr2, tr)?;
    Ok(SupervisedResult {
        observable: obs,
        trials,
        theory: SupervisedTheory {
            mean_eigenvalue_exact: diag.exact,
            mean_eigenvalue_leading: diag.leading,
            off_diagonal_exact: off.exact,
            bulk_eigenvalue: spec.bulk,
            lowest_eigenvalue: spec.lowest,
        },
    })
}

fn rand_unit(rng: &mut RngStream) -> f64 {
    rng.random::<f64>()
}

impl SupervisedResult {
    fn write(&self, cfg: &ExperimentConfig, out: &Path) -> Result<Status> {
        let hash = cfg.digest();
        let dir = out.join("trials");
        fs::create_dir_all(&dir)?;
        let size = cfg.set_size.unwrap_or(0);
        let mut header = vec!["t".to_string(), "loss".into(), "kernel".into()];
        header.extend((0..size).map(|i| format!("residual_{i}")));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        for t in &self.trials {
            let mut csv = Csv::new(&hash, &header_refs);
            if let Some(traj) = &t.trajectory {
                let res = traj.residuals.as_ref().expect("supervised runs record residuals");
                for (s, ((e, k), r)) in traj.errors.iter().zip(&traj.kernel).zip(res).enumerate() {
                    let mut row = vec![s.to_string(), num(*e), num(*k)];
                    row.extend(r.iter().map(|x| num(*x)));
                    csv.row(&row);
                }
            }
            csv.write(&dir.join(format!("trial_{}.csv", t.trial)))?;
        }
        let done: Vec<&Trajectory> = self.trials.iter().filter_map(|t| t.trajectory.as_ref()).collect();
        let mut summary =
            Csv::new(&hash, &["t", "trials", "mean_loss", "mean_log_loss", "mean_kernel", "kernel_theory"]);
        let floor = cfg.floor.unwrap_or(DEFAULT_FLOOR);
        if !done.is_empty() {
            let n = done.len() as f64;
            for s in 0..done[0].errors.len() {
                summary.row(&[
                    s.to_string(),
                    done.len().to_string(),
                    num(kahan_sum(done.iter().map(|t| t.errors[s])) / n),
                    num(kahan_sum(done.iter().map(|t| t.errors[s].max(floor).ln())) / n),
                    num(kahan_sum(done.iter().map(|t| t.kernel[s])) / n),
                    num(self.theory.mean_eigenvalue_exact),
                ]);
            }
        }
        summary.write(&out.join("summary.csv"))?;
        write_observable(&self.observable, out)?;

        #[derive(Serialize)]
        struct Trial {
            trial: usize,
            diverged: Option<String>,
        }
        #[derive(Serialize)]
        struct Report<'a> {
            provenance: Provenance,
            theory: &'a SupervisedTheory,
            trials: Vec<Trial>,
        }
        write_json(
            &out.join("report.json"),
            &Report {
                provenance: provenance(cfg),
                theory: &self.theory,
                trials: self.trials.iter().map(|t| Trial { trial: t.trial, diverged: t.error.clone() }).collect(),
            },
        )?;
        if !self.trials.is_empty() && self.trials.iter().all(|t| t.error.is_some()) {
            return Ok(Status::AllDiverged);
        }
        Ok(Status::Success)
    }
}

// ---------------------------------------------------------------- eigen-scan

#[derive(Debug, Clone, Serialize)]
pub struct EigenRow {
    pub set_size: usize,
    pub trials: usize,
    /// Mean over instances of the smallest kernel eigenvalue.
    pub mean_lowest: f64,
    pub std_lowest: f64,
    pub std_err_lowest: f64,
    /// Smallest eigenvalue of the instance-averaged kernel matrix.
    pub lowest_of_mean: f64,
    /// Mean over instances of `Tr K / |A|`.
    pub mean_eigenvalue: f64,
    pub theory_lowest: f64,
    pub theory_bulk: f64,
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub observable: Observable,
    pub rows: Vec<EigenRow>,
    /// `(set size, trial, lowest eigenvalue)` per instance.
    pub instances: Vec<(usize, usize, f64)>,
}

pub fn eigen_scan(cfg: &ExperimentConfig) -> Result<EigenResult> {
    let obs = cfg.build_observable()?;
    let layers = cfg.layer_count();
    let trials = cfg.trials.unwrap_or(0);
    let mut rows = Vec::new();
    let mut instances = Vec::new();
    for &size in cfg.set_sizes.as_deref().unwrap_or_default() {
        let base = RngStream::new(cfg.seed, size as u64);
        let prob = SupervisedProblem::with_basis_features(
            cfg.qubits,
            vec![vec![0.0]; size],
            vec![obs.clone()],
            (0..size).collect(),
        )?;
        let kernels: Vec<KernelMatrix> = (0..trials)
            .into_par_iter()
            .map(|k| {
                let mut r = base.substream(k as u64);
                let a = build_random_ansatz(cfg.qubits, layers, cfg.exclude_identity, &mut r);
                let theta = ParameterVector::uniform(layers, &mut r);
                supervised_kernel(&a, &theta, &prob)
            })
            .collect::<qntk_core::Result<_>>()?;
        let lows: Vec<f64> = kernels.iter().map(KernelMatrix::min_eigenvalue).collect();
        let s = summarize(&lows);
        let dim = size;
        let mean_kernel = KernelMatrix::mean(&kernels).context("no eigen-scan trials")?;
        let spec = kernel_eigenvalues(cfg.dim(), layers, size, obs.trace_moment(2), obs.trace_moment(1))?;
        rows.push(EigenRow {
            set_size: size,
            trials,
            mean_lowest: s.mean,
            std_lowest: s.std_dev,
            std_err_lowest: s.std_err,
            lowest_of_mean: mean_kernel.min_eigenvalue(),
            mean_eigenvalue: kahan_sum(kernels.iter().map(|k| k.trace() / dim as f64)) / trials as f64,
            theory_lowest: spec.lowest,
            theory_bulk: spec.bulk,
        });
        instances.extend(lows.iter().enumerate().map(|(k, &l)| (size, k, l)));
    }
    Ok(EigenResult { observable: obs, rows, instances })
}

impl EigenResult {
    fn write(&self, cfg: &ExperimentConfig, out: &Path) -> Result<Status> {
        let hash = cfg.digest();
        let mut csv = Csv::new(
            &hash,
            &[
                "set_size",
                "trials",
                "mean_lowest",
                "std_lowest",
                "std_err_lowest",
                "lowest_of_mean_kernel",
                "mean_eigenvalue",
                "theory_lowest",
                "theory_bulk",
            ],
        );
        for r in &self.rows {
            csv.row(&[
                r.set_size.to_string(),
                r.trials.to_string(),
                num(r.mean_lowest),
                num(r.std_lowest),
                num(r.std_err_lowest),
                num(r.lowest_of_mean),
                num(r.mean_eigenvalue),
                num(r.theory_lowest),
                num(r.theory_bulk),
            ]);
        }
        csv.write(&out.join("summary.csv"))?;
        let mut samples = Csv::new(&hash, &["set_size", "trial", "lowest"]);
        for (a, k, l) in &self.instances {
            samples.row(&[a.to_string(), k.to_string(), num(*l)]);
        }
        samples.write(&out.join("samples.csv"))?;
        write_observable(&self.observable, out)?;
        #[derive(Serialize)]
        struct Report<'a> {
            provenance: Provenance,
            rows: &'a [EigenRow],
        }
        write_json(&out.join("report.json"), &Report { provenance: provenance(cfg), rows: &self.rows })?;
        Ok(Status::Success)
    }
}

// ---------------------------------------------------------------- haar-check

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub target: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub z_score: f64,
    pub samples: usize,
    pub attempts: usize,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct HaarResult {
    pub checks: Vec<CheckRecord>,
}

pub fn haar_check(cfg: &ExperimentConfig) -> Result<HaarResult> {
    let checks = haar_suite(cfg.qubits, cfg.samples.unwrap_or(0), &RngStream::new(cfg.seed, 0))?
        .into_iter()
        .map(|c| CheckRecord {
            name: c.name,
            target: c.estimate.target,
            estimate: c.estimate.mean,
            std_err: c.estimate.std_err,
            z_score: c.estimate.z_score,
            samples: c.estimate.count,
            attempts: c.attempts,
            passed: c.passed,
        })
        .collect();
    Ok(HaarResult { checks })
}

impl HaarResult {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn write(&self, cfg: &ExperimentConfig, out: &Path) -> Result<Status> {
        let mut csv =
            Csv::new(&cfg.digest(), &["check", "target", "estimate", "std_err", "z_score", "attempts", "passed"]);
        for c in &self.checks {
            csv.row(&[
                c.name.clone(),
                num(c.target),
                num(c.estimate),
                num(c.std_err),
                num(c.z_score),
                c.attempts.to_string(),
                c.passed.to_string(),
            ]);
        }
        csv.write(&out.join("summary.csv"))?;
        #[derive(Serialize)]
        struct Report<'a> {
            provenance: Provenance,
            dimension: usize,
            checks: &'a [CheckRecord],
            all_passed: bool,
        }
        write_json(
            &out.join("report.json"),
            &Report {
                provenance: provenance(cfg),
                dimension: cfg.dim(),
                checks: &self.checks,
                all_passed: self.all_passed(),
            },
        )?;
        Ok(if self.all_passed() { Status::Success } else { Status::ChecksFailed })
    }
}

/// Every regular file under `dir`, sorted, as paths relative to `dir`.
pub fn list_outputs(dir: &Path) -> Result<Vec<PathBuf>> {
    fn walk(root: &Path, dir: &Path, acc: &mut Vec<PathBuf>) -> std::io::Result<()> {
        for entry in fs::read_dir(dir)? {
            let p = entry?.path();
            if p.is_dir() {
                walk(root, &p, acc)?;
            } else {
                acc.push(p.strip_prefix(root).expect("under root").to_path_buf());
            }
        }
        Ok(())
    }
    let mut acc = Vec::new();
    walk(dir, dir, &mut acc)?;
    acc.sort();
    Ok(acc)
}
