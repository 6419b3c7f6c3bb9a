// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Closed-form ensemble predictions for 2-design (and higher) random circuits.
//!
//! Each predictor comes in an exact finite-`D` form where one exists and a
//! leading-order large-`D` form. The two differ by O(1) factors at small `D`
//! (for traceless `O` the exact average kernel tends to twice the leading
//! value), so both are always reported.

use crate::error::{Error, Result};
use crate::observable::Observable;

/// Scalars the closed forms depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryInputs {
    /// Hilbert-space dimension `D`.
    pub dim: f64,
    /// Number of parameterized layers `L`.
    pub layers: f64,
    pub tr_o: f64,
    pub tr_o2: f64,
    pub tr_o4: f64,
    pub tr_o6: f64,
    /// `Σ_ℓ Tr(X_ℓ²)`; equals `L·D` for Pauli generators.
    pub sum_tr_x2: f64,
    pub eta: f64,
}

impl TheoryInputs {
    /// Inputs for Pauli generators and the trace moments of `obs`.
    pub fn from_observable(obs: &Observable, layers: usize, eta: f64) -> Self {
        let dim = obs.dim() as f64;
        Self {
            dim,
            layers: layers as f64,
            tr_o: obs.trace_moment(1),
            tr_o2: obs.trace_moment(2),
            tr_o4: obs.trace_moment(4),
            tr_o6: obs.trace_moment(6),
            sum_tr_x2: layers as f64 * dim,
            eta,
        }
    }

    pub fn with_layers(self, layers: usize) -> Self {
        Self { layers: layers as f64, sum_tr_x2: layers as f64 * self.dim, ..self }
    }

    pub fn with_eta(self, eta: f64) -> Self {
        Self { eta, ..self }
    }

    /// `D·Tr(O²) − Tr²(O)`.
    fn centered_tr_o2(&self) -> f64 {
        self.dim * self.tr_o2 - self.tr_o * self.tr_o
    }
}

/// Exact average kernel
/// `K̄ = 2/(D²+D) · (D·Tr O² − Tr² O)/(D²−1) · Σ Tr X_ℓ²`.
pub fn kbar_exact(inp: &TheoryInputs) -> f64 {
    let d = inp.dim;
    2.0 / (d * d + d) * inp.centered_tr_o2() / (d * d - 1.0) * inp.sum_tr_x2
}

/// Leading order `K̄ ≈ L·Tr(O²)/D²`.
pub fn kbar_leading(inp: &TheoryInputs) -> f64 {
    inp.layers * inp.tr_o2 / (inp.dim * inp.dim)
}

/// Per-step decay rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRate {
    /// `η·L·Tr(O²)/D²`.
    pub leading: f64,
    /// `η·K̄` with the exact average kernel.
    pub exact: f64,
}

pub fn gamma(inp: &TheoryInputs) -> DecayRate {
    DecayRate { leading: inp.eta * kbar_leading(inp), exact: inp.eta * kbar_exact(inp) }
}

/// Leading-order kernel standard deviation
/// `ΔK ≈ √L/D² · √(8 Tr²(O²) + 12 Tr(O⁴))`.
pub fn delta_k(inp: &TheoryInputs) -> f64 {
    inp.layers.sqrt() / (inp.dim * inp.dim) * (8.0 * inp.tr_o2 * inp.tr_o2 + 12.0 * inp.tr_o4).sqrt()
}

/// Leading-order meta-kernel spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaKernelSpread {
    /// `√32·L/D³ · Tr^{3/2}(O²)`, consistent with `μ` defined without `η`.
    pub eta_free: f64,
    /// The same expression multiplied by `η`.
    pub with_eta: f64,
}

pub fn delta_mu(inp: &TheoryInputs) -> MetaKernelSpread {
    let eta_free = 32f64.sqrt() * inp.layers / inp.dim.powi(3) * inp.tr_o2.powf(1.5);
    MetaKernelSpread { eta_free, with_eta: inp.eta * eta_free }
}

/// Ratios that must both be small for the frozen-kernel picture to hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Concentration {
    /// `ΔK/K̄ ≈ 1/√L`.
    pub ratio_k: f64,
    /// `Δμ/K̄ ≈ η·√Tr(O²)/D`.
    pub ratio_mu: f64,
    /// Both ratios below the threshold.
    pub analytic_regime: bool,
}

pub const DEFAULT_CONCENTRATION_THRESHOLD: f64 = 0.1;

pub fn concentration(inp: &TheoryInputs, threshold: f64) -> Result<Concentration> {
    if inp.layers < 1.0 {
        return Err(Error::InvalidArgument("concentration needs L >= 1".into()));
    }
    let ratio_k = 1.0 / inp.layers.sqrt();
    let ratio_mu = inp.eta * inp.tr_o2.sqrt() / inp.dim;
    Ok(Concentration { ratio_k, ratio_mu, analytic_regime: ratio_k < threshold && ratio_mu < threshold })
}

/// Average supervised kernel entry for one pair of samples and outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupervisedKbar {
    /// `2L(D·σ − 1)/(D²−1)² · (D·Tr(O₁O₂) − Tr O₁·Tr O₂)`.
    pub exact: f64,
    /// `2L·σ·Tr(O₁O₂)/D²`.
    pub leading: f64,
}

/// `sigma` is the feature cross-section `|⟨φ(x₁)|φ(x₂)⟩|²`.
pub fn supervised_kbar(inp: &TheoryInputs, sigma: f64, tr_o1o2: f64, tr_o1: f64, tr_o2: f64) -> Result<SupervisedKbar> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::InvalidArgument(format!("cross-section {sigma} outside [0, 1]")));
    }
    let (d, l) = (inp.dim, inp.layers);
    let exact = 2.0 * l * (d * sigma - 1.0) / (d * d - 1.0).powi(2) * (d * tr_o1o2 - tr_o1 * tr_o2);
    let leading = 2.0 * l * sigma * tr_o1o2 / (d * d);
    Ok(SupervisedKbar { exact, leading })
}

/// Spectrum of the average kernel for orthogonal features and a shared
/// observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpectrum {
    /// `2DL(D·Tr O² − Tr² O)/(D²−1)²`, multiplicity `|A| − 1`.
    pub bulk: f64,
    /// `2L(D − |A|)(D·Tr O² − Tr² O)/(D²−1)²`, multiplicity one.
    pub lowest: f64,
}

pub fn kernel_eigenvalues(dim: usize, layers: usize, set_size: usize, tr_o2: f64, tr_o: f64) -> Result<KernelSpectrum> {
    if set_size > dim {
        return Err(Error::TrainingSetTooLarge { size: set_size, dim });
    }
    let (d, l, a) = (dim as f64, layers as f64, set_size as f64);
    let c = (d * tr_o2 - tr_o * tr_o) / (d * d - 1.0).powi(2);
    Ok(KernelSpectrum { bulk: 2.0 * d * l * c, lowest: 2.0 * l * (d - a) * c })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zz_inputs(layers: usize) -> TheoryInputs {
        TheoryInputs {
            dim: 4.0,
            layers: layers as f64,
            tr_o: 0.0,
            tr_o2: 4.0,
            tr_o4: 4.0,
            tr_o6: 4.0,
            sum_tr_x2: 4.0 * layers as f64,
            eta: 1e-4,
        }
    }

    #[test]
    fn kbar_exact_zz() {
        assert!((kbar_exact(&zz_inputs(16)) - 1024.0 / 150.0).abs() < 1e-12);
        assert_eq!(kbar_exact(&zz_inputs(0)), 0.0);
        // O ∝ I
        let id = TheoryInputs { tr_o: 8.0, tr_o2: 16.0, ..zz_inputs(16) };
        assert_eq!(kbar_exact(&id), 0.0);
    }

    #[test]
    fn kbar_leading_zz() {
        assert_eq!(kbar_leading(&zz_inputs(16)), 4.0);
        assert_eq!(kbar_leading(&zz_inputs(0)), 0.0);
    }

    #[test]
    fn exact_over_leading_limit() {
        // D = 2^10, traceless O with Tr O² = D
        let d = 1024.0;
        let inp = TheoryInputs {
            dim: d,
            layers: 10.0,
            tr_o: 0.0,
            tr_o2: d,
            tr_o4: d,
            tr_o6: d,
            sum_tr_x2: 10.0 * d,
            eta: 0.0,
        };
        let ratio = kbar_exact(&inp) / kbar_leading(&inp);
        assert!((ratio - 2.0).abs() < 1e-2);
        // with a trace part, the limit is 2(1 − Tr²O/(D·TrO²))
        let shifted = TheoryInputs { tr_o: 0.5 * d, tr_o2: d, ..inp };
        let ratio = kbar_exact(&shifted) / kbar_leading(&shifted);
        assert!((ratio - 2.0 * (1.0 - 0.25)).abs() < 1e-2);
    }

    #[test]
    fn gamma_zz() {
        let g = gamma(&zz_inputs(64));
        assert!((g.leading - 1.6e-3).abs() < 1e-15);
        assert_eq!(gamma(&zz_inputs(64).with_eta(0.0)).leading, 0.0);
        let g2 = gamma(&zz_inputs(128));
        assert!((g2.leading - 2.0 * g.leading).abs() < 1e-15);
        assert!((g2.exact - 2.0 * g.exact).abs() < 1e-15);
    }

    #[test]
    fn delta_k_zz() {
        assert!((delta_k(&zz_inputs(16)) - 0.25 * 176f64.sqrt()).abs() < 1e-12);
        assert_eq!(delta_k(&zz_inputs(0)), 0.0);
    }

    #[test]
    fn delta_mu_zz() {
        let m = delta_mu(&zz_inputs(16));
        assert!((m.eta_free - 8.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((m.with_eta - 1e-4 * m.eta_free).abs() < 1e-15);
        assert_eq!(delta_mu(&zz_inputs(0)).eta_free, 0.0);
    }

    #[test]
    fn concentration_ratios() {
        let c = concentration(&zz_inputs(100), 0.1).unwrap();
        assert!((c.ratio_k - 0.1).abs() < 1e-15);
        let c = concentration(&zz_inputs(16), 0.1).unwrap();
        assert!((c.ratio_mu - 5e-5).abs() < 1e-18);
        assert!(!c.analytic_regime);
        assert!(concentration(&zz_inputs(10_000), 0.1).unwrap().analytic_regime);
        assert_eq!(concentration(&zz_inputs(16).with_eta(0.0), 0.1).unwrap().ratio_mu, 0.0);
        assert!(concentration(&zz_inputs(0), 0.1).is_err());
    }

    #[test]
    fn supervised_kbar_values() {
        let s = supervised_kbar(&zz_inputs(16), 1.0, 4.0, 0.0, 0.0).unwrap();
        assert!((s.exact - kbar_exact(&zz_inputs(16))).abs() < 1e-12);
        let root = supervised_kbar(&zz_inputs(16), 0.25, 4.0, 0.0, 0.0).unwrap();
        assert_eq!(root.exact, 0.0);
        let inp = TheoryInputs { dim: 16.0, ..zz_inputs(64) };
        let off = supervised_kbar(&inp, 0.0, 16.0, 0.0, 0.0).unwrap();
        assert!((off.exact + 128.0 * 256.0 / 65025.0).abs() < 1e-12);
        assert!(supervised_kbar(&inp, 1.5, 16.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn eigenvalue_formulas() {
        let s = kernel_eigenvalues(16, 64, 10, 16.0, 0.0).unwrap();
        assert!((s.lowest - 196608.0 / 65025.0).abs() < 1e-12);
        assert!((s.bulk - 524288.0 / 65025.0).abs() < 1e-12);
        assert_eq!(kernel_eigenvalues(16, 64, 16, 16.0, 0.0).unwrap().lowest, 0.0);
        let s2 = kernel_eigenvalues(16, 64, 2, 16.0, 0.0).unwrap();
        assert!((s2.lowest - 2.0 * 64.0 * 14.0 * 256.0 / 65025.0).abs() < 1e-12);
        assert_eq!(s2.bulk, s.bulk);
        assert!(kernel_eigenvalues(16, 64, 17, 16.0, 0.0).is_err());
    }
}
