// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Declarative experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use qntk_core::{AnsatzFamily, HardwareVariant, Observable, PauliString, ResampleMode, RngStream};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    QntkStats,
    Train,
    TrainSupervised,
    EigenScan,
    HaarCheck,
    DecayFit,
}

impl ExperimentKind {
    pub fn tag(self) -> &'static str {
        match self {
            Self::QntkStats => "qntk-stats",
            Self::Train => "train",
            Self::TrainSupervised => "train-supervised",
            Self::EigenScan => "eigen-scan",
            Self::HaarCheck => "haar-check",
            Self::DecayFit => "decay-fit",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A single layer count or a list of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Layers {
    One(usize),
    Many(Vec<usize>),
}

impl Layers {
    pub fn values(&self) -> Vec<usize> {
        match self {
            Self::One(l) => vec![*l],
            Self::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: f64,
    pub pauli: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservableSpec {
    PauliSum {
        terms: Vec<TermSpec>,
    },
    RandomPauliSum {
        #[serde(default = "default_term_count")]
        count: usize,
        #[serde(default = "default_coeff_range")]
        coeff_range: [f64; 2],
    },
}

fn default_term_count() -> usize {
    10
}

fn default_coeff_range() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    #[default]
    Instance,
    Angle,
}

impl From<ModeSpec> for ResampleMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Instance => ResampleMode::Instance,
            ModeSpec::Angle => ResampleMode::Angle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzSpecKind {
    #[default]
    RandomHaar,
    HardwareEfficientCphase,
    HardwareEfficientCnot,
}

impl AnsatzSpecKind {
    pub fn family(self) -> AnsatzFamily {
        match self {
            Self::RandomHaar => AnsatzFamily::RandomHaar,
            Self::HardwareEfficientCphase => AnsatzFamily::HardwareEfficientCphase,
            Self::HardwareEfficientCnot => AnsatzFamily::HardwareEfficientCnot,
        }
    }

    pub fn hardware_variant(self) -> Option<HardwareVariant> {
        match self {
            Self::RandomHaar => None,
            Self::HardwareEfficientCphase => Some(HardwareVariant::CphaseLadder),
            Self::HardwareEfficientCnot => Some(HardwareVariant::CnotSu2),
        }
    }
}

/// One experiment. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<Layers>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableSpec>,
    /// `O₀` of the single-target loss.
    #[serde(default)]
    pub target: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default = "default_true")]
    pub exclude_identity: bool,
    #[serde(default)]
    pub ansatz: AnsatzSpecKind,
    /// Also evaluate the meta-kernel in `qntk-stats`.
    #[serde(default)]
    pub meta_kernel: bool,
    /// Training-set sizes for `eigen-scan`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_sizes: Option<Vec<usize>>,
    /// Training-set size for `train-supervised`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_size: Option<usize>,
    /// Range of the uniformly drawn labels for `train-supervised`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
}

/// Validation failure, with the 1-based line of the offending key when known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Line of the first occurrence of `"key"` as an object key.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().enumerate().find_map(|(i, line)| {
        let pos = line.find(&needle)?;
        line[pos + needle.len()..].trim_start().starts_with(':').then_some(i + 1)
    })
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn fail(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: key_line(self.text, key).or_else(|| key_line(self.text, "experiment")),
            column: None,
            message: message.into(),
        }
    }

    fn need<T: Copy>(&self, value: Option<T>, key: &str, kind: ExperimentKind) -> Result<T, ConfigError> {
        value.ok_or_else(|| self.fail(key, format!("`{key}` is required for {kind}")))
    }
}

impl ExperimentConfig {
    /// Parses and validates; `text` is the raw file contents.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError {
            line: Some(e.line()),
            column: Some(e.column()),
            message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
        })?;
        cfg.validate_against(text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_against(&self.echo())
    }

    fn validate_against(&self, text: &str) -> Result<(), ConfigError> {
        let ck = Checker { text };
        let kind = self.experiment;
        if self.qubits == 0 || self.qubits > MAX_QUBITS {
            return Err(ck.fail("qubits", format!("`qubits` must be in 1..={MAX_QUBITS}, got {}", self.qubits)));
        }
        if self.ansatz != AnsatzSpecKind::RandomHaar && self.qubits < 2 {
            return Err(ck.fail("qubits", "hardware-efficient ansatz needs at least 2 qubits"));
        }
        if !self.target.is_finite() {
            return Err(ck.fail("target", "`target` must be finite"));
        }
        if let Some(ObservableSpec::PauliSum { terms }) = &self.observable {
            if terms.is_empty() {
                return Err(ck.fail("terms", "`terms` must not be empty"));
            }
            for t in terms {
                let p: PauliString =
                    t.pauli.parse().map_err(|e| ck.fail("pauli", format!("bad Pauli string {:?}: {e}", t.pauli)))?;
                if p.qubits() != self.qubits {
                    return Err(ck.fail(
                        "pauli",
                        format!("Pauli string {:?} has {} letters, expected {}", t.pauli, p.qubits(), self.qubits),
                    ));
                }
                if !t.coeff.is_finite() {
                    return Err(ck.fail("coeff", "coefficients must be finite"));
                }
            }
        }
        if let Some(ObservableSpec::RandomPauliSum { count, coeff_range }) = &self.observable {
            if *count == 0 {
                return Err(ck.fail("count", "`count` must be positive"));
            }
            if !(coeff_range[0].is_finite() && coeff_range[1].is_finite() && coeff_range[0] < coeff_range[1]) {
                return Err(ck.fail("coeff_range", "`coeff_range` must be an increasing pair of finite numbers"));
            }
        }

        let needs_observable = kind != ExperimentKind::HaarCheck;
        if needs_observable && self.observable.is_none() {
            return Err(ck.fail("observable", format!("`observable` is required for {kind}")));
        }
        let positive = |v: Option<usize>, key: &str| -> Result<usize, ConfigError> {
            let v = ck.need(v, key, kind)?;
            if v == 0 {
                return Err(ck.fail(key, format!("`{key}` must be positive")));
            }
            Ok(v)
        };
        match kind {
            ExperimentKind::QntkStats => {
                let layers =
                    self.layers.as_ref().ok_or_else(|| ck.fail("layers", "`layers` is required for qntk-stats"))?;
                if layers.values().is_empty() {
                    return Err(ck.fail("layers", "`layers` must not be empty"));
                }
                positive(self.samples, "samples")?;
                if self.ansatz != AnsatzSpecKind::RandomHaar {
                    return Err(ck.fail("ansatz", "qntk-stats samples the random-haar ansatz only"));
                }
            }
            ExperimentKind::Train | ExperimentKind::DecayFit | ExperimentKind::TrainSupervised => {
                self.single_layer(&ck)?;
                let eta = ck.need(self.learning_rate, "learning_rate", kind)?;
                if !(eta > 0.0 && eta.is_finite()) {
                    return Err(ck.fail("learning_rate", "`learning_rate` must be positive"));
                }
                positive(self.steps, "steps")?;
                positive(self.trials, "trials")?;
                if let Some(f) = self.floor {
                    if !(f >= 0.0 && f.is_finite()) {
                        return Err(ck.fail("floor", "`floor` must be non-negative"));
                    }
                }
                if kind == ExperimentKind::TrainSupervised {
                    let a = positive(self.set_size, "set_size")?;
                    if a > self.dim() {
                        return Err(
                            ck.fail("set_size", format!("`set_size` {a} exceeds the Hilbert dimension {}", self.dim()))
                        );
                    }
                    if self.ansatz != AnsatzSpecKind::RandomHaar {
                        return Err(ck.fail("ansatz", "train-supervised uses the random-haar ansatz"));
                    }
                    let [lo, hi] = self.labels();
                    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                        return Err(ck.fail("label_range", "`label_range` must be an increasing pair"));
                    }
                }
            }
            ExperimentKind::EigenScan => {
                self.single_layer(&ck)?;
                positive(self.trials, "trials")?;
                let sizes = self
                    .set_sizes
                    .as_ref()
                    .ok_or_else(|| ck.fail("set_sizes", "`set_sizes` is required for eigen-scan"))?;
                if sizes.is_empty() {
                    return Err(ck.fail("set_sizes", "`set_sizes` must not be empty"));
                }
                if let Some(&a) = sizes.iter().find(|&&a| a < 2 || a > self.dim()) {
                    return Err(ck.fail("set_sizes", format!("training-set size {a} outside [2, {}]", self.dim())));
                }
                if self.ansatz != AnsatzSpecKind::RandomHaar {
                    return Err(ck.fail("ansatz", "eigen-scan uses the random-haar ansatz"));
                }
            }
            ExperimentKind::HaarCheck => {
                positive(self.samples, "samples")?;
            }
        }
        Ok(())
    }

    fn single_layer(&self, ck: &Checker<'_>) -> Result<usize, ConfigError> {
        match &self.layers {
            Some(Layers::One(l)) => Ok(*l),
            Some(Layers::Many(v)) if v.len() == 1 => Ok(v[0]),
            Some(Layers::Many(_)) => Err(ck.fail("layers", format!("{} takes a single layer count", self.experiment))),
            None => Err(ck.fail("layers", format!("`layers` is required for {}", self.experiment))),
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    /// The layer count of single-depth experiments.
    pub fn layer_count(&self) -> usize {
        self.layers.as_ref().map(|l| l.values()[0]).unwrap_or(0)
    }

    pub fn labels(&self) -> [f64; 2] {
        self.label_range.unwrap_or([-1.0, 1.0])
    }

    /// Canonical JSON used for the echo file and the config hash.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.echo().as_bytes()))
    }

    /// Output directory: the explicit override, else `output` relative to
    /// the config file's directory, else `out` next to the config file.
    pub fn output_dir(&self, config_path: Option<&Path>, override_dir: Option<&Path>) -> PathBuf {
        if let Some(d) = override_dir {
            return d.to_path_buf();
        }
        let base = config_path.and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default();
        base.join(self.output.as_deref().unwrap_or("out"))
    }

    /// Realizes the observable; random sums draw from `OBSERVABLE_STREAM`.
    pub fn build_observable(&self) -> qntk_core::Result<Observable> {
        match self.observable.as_ref() {
            Some(ObservableSpec::PauliSum { terms }) => {
                let terms = terms
                    .iter()
                    .map(|t| Ok((t.coeff, t.pauli.parse::<PauliString>()?)))
                    .collect::<qntk_core::Result<Vec<_>>>()?;
                Observable::from_terms(self.qubits, terms, self.target)
            }
            Some(ObservableSpec::RandomPauliSum { count, coeff_range }) => {
                let mut rng = RngStream::new(self.seed, OBSERVABLE_STREAM);
                Observable::random_pauli_sum(
                    self.qubits,
                    *count,
                    (coeff_range[0], coeff_range[1]),
                    self.target,
                    &mut rng,
                )
            }
            None => Err(qntk_core::Error::InvalidArgument("no observable configured".into())),
        }
    }
}

/// Stream index reserved for the random observable.
pub const OBSERVABLE_STREAM: u64 = u64::MAX;

#[cfg(test)]
mod tests {
    use super::*;

    const STATS: &str = r#"{
  "experiment": "qntk-stats",
  "qubits": 2,
  "layers": [4, 8],
  "observable": {"kind": "pauli-sum", "terms": [{"coeff": 1.0, "pauli": "ZZ"}]},
  "samples": 100,
  "seed": 7
}"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::parse(STATS).unwrap();
        assert_eq!(cfg.layers.as_ref().unwrap().values(), vec![4, 8]);
        assert_eq!(cfg.mode, ModeSpec::Instance);
        assert!(cfg.exclude_identity);
        let again = ExperimentConfig::parse(&cfg.echo()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.digest(), again.digest());
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let text = STATS.replace("\"seed\": 7", "\"seed\": 7,\n  \"sede\": 8");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert_eq!(err.line, Some(8));
        assert!(err.message.contains("sede"), "{err}");
    }

    #[test]
    fn semantic_error_reports_key_line() {
        let text = STATS.replace("\"samples\": 100", "\"samples\": 0");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert_eq!(err.line, Some(6));
        assert!(err.message.contains("samples"));
    }

    #[test]
    fn missing_seed_is_rejected() {
        let text = STATS.replace(",\n  \"seed\": 7", "");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.message.contains("seed"), "{err}");
    }

    #[test]
    fn bad_pauli_width() {
        let text = STATS.replace("\"ZZ\"", "\"ZZZ\"");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert_eq!(err.line, Some(5));
    }

    #[test]
    fn eigen_scan_bounds() {
        let text = r#"{
  "experiment": "eigen-scan",
  "qubits": 2,
  "layers": 8,
  "observable": {"kind": "pauli-sum", "terms": [{"coeff": 1.0, "pauli": "ZZ"}]},
  "trials": 3,
  "set_sizes": [2, 5],
  "seed": 1
}"#;
        let err = ExperimentConfig::parse(text).unwrap_err();
        assert_eq!(err.line, Some(7));
        assert!(err.message.contains("outside [2, 4]"));
    }

    #[test]
    fn random_observable_is_seeded() {
        let text = STATS.replace(
            r#"{"kind": "pauli-sum", "terms": [{"coeff": 1.0, "pauli": "ZZ"}]}"#,
            r#"{"kind": "random-pauli-sum"}"#,
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let a = cfg.build_observable().unwrap();
        let b = cfg.build_observable().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.terms().len(), 10);
    }
}
