// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Runs each criterion at its stated size and tolerance,
//! prints one PASS/FAIL line per criterion, and exits non-zero if any fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use qntk_cli::runners::{self, list_outputs};
use qntk_cli::ExperimentConfig;
use qntk_core::{
    build_random_ansatz, gradient, hessian_residual, residual_error, supervised_kernel, Observable, ParameterVector,
    RngStream, Statevector, SupervisedProblem,
};

const KBAR_ZZ: &str = r#"{
  "experiment": "qntk-stats",
  "qubits": 2,
  "layers": [16],
  "observable": {"kind": "pauli-sum", "terms": [{"coeff": 1.0, "pauli": "ZZ"}]},
  "samples": 10000,
  "mode": "instance",
  "seed": 1
}"#;

const SCALING: &str = r#"{
  "experiment": "qntk-stats",
  "qubits": 2,
  "layers": [4, 8, 16, 32, 64],
  "observable": {"kind": "random-pauli-sum", "count": 10, "coeff_range": [0.0, 1.0]},
  "samples": 2000,
  "mode": "instance",
  "seed": 1
}"#;

const DECAY: &str = r#"{
  "experiment": "train",
  "qubits": 2,
  "layers": 64,
  "observable": {"kind": "random-pauli-sum", "count": 10, "coeff_range": [0.0, 1.0]},
  "learning_rate": 0.0001,
  "steps": 1000,
  "trials": 50,
  "seed": 1
}"#;

const EIGEN: &str = r#"{
  "experiment": "eigen-scan",
  "qubits": 4,
  "layers": 64,
  "observable": {"kind": "pauli-sum", "terms": [{"coeff": 1.0, "pauli": "ZZII"}]},
  "trials": 50,
  "set_sizes": [2, 3, 4, 5, 6, 7, 8, 9, 10],
  "seed": 1
}"#;

const HAAR_D2: &str = r#"{
  "experiment": "haar-check",
  "qubits": 1,
  "samples": 100000,
  "seed": 1
}"#;

const HAAR_D4: &str = r#"{
  "experiment": "haar-check",
  "qubits": 2,
  "samples": 100000,
  "seed": 1
}"#;

const META: &str = r#"{
  "experiment": "qntk-stats",
  "qubits": 2,
  "layers": [8],
  "observable": {"kind": "pauli-sum", "terms": [{"coeff": 1.0, "pauli": "ZZ"}]},
  "samples": 2000,
  "meta_kernel": true,
  "seed": 1
}"#;

struct Outcome {
    pass: bool,
    detail: String,
}

fn cfg(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).expect("acceptance config parses")
}

fn random_observable(n: usize, rng: &mut RngStream) -> Observable {
    Observable::random_pauli_sum(n, 10, (0.0, 1.0), 0.0, rng).unwrap()
}

fn criterion_1() -> Outcome {
    let h = 1e-5;
    let mut rng = RngStream::new(1, 1);
    let (mut worst_rel, mut worst_abs, mut failures, mut checked) = (0.0f64, 0.0f64, 0, 0);
    for k in 0..100 {
        let n = 2 + k % 2;
        let layers = if (k / 2) % 2 == 0 { 4 } else { 8 };
        let a = build_random_ansatz(n, layers, true, &mut rng);
        let theta = ParameterVector::uniform(layers, &mut rng);
        let obs = random_observable(n, &mut rng);
        let psi0 = Statevector::zero_state(n);
        let g = gradient(&a, &theta, &obs, &psi0).unwrap();
        for (l, &gl) in g.iter().enumerate() {
            let at = |d: f64| {
                let mut t = theta.clone();
                t.as_mut_slice()[l] += d;
                residual_error(&a, &t, &obs, &psi0).unwrap()
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            checked += 1;
            if gl.abs() < 1e-6 {
                worst_abs = worst_abs.max((gl - fd).abs());
                failures += usize::from((gl - fd).abs() > 1e-9);
            } else {
                let rel = ((gl - fd) / gl).abs();
                worst_rel = worst_rel.max(rel);
                failures += usize::from(rel > 1e-6);
            }
        }
    }
    Outcome {
        pass: failures == 0,
        detail: format!(
            "{checked} partials on 100 configs; max rel err {worst_rel:.2e} (tol 1e-6), max abs err on tiny partials {worst_abs:.2e} (tol 1e-9), {failures} failures"
        ),
    }
}

fn criterion_2() -> Outcome {
    let r = runners::qntk_stats(&cfg(KBAR_ZZ)).unwrap();
    let row = &r.rows[0];
    Outcome {
        pass: row.z_score.abs() <= 3.0 && (row.kbar_exact - 6.8267).abs() < 1e-4,
        detail: format!(
            "mean K {:.4} ± {:.4} vs kbar_exact {:.4}, z = {:+.2}",
            row.mean_k, row.std_err_k, row.kbar_exact, row.z_score
        ),
    }
}

fn criterion_3() -> Outcome {
    let r = runners::qntk_stats(&cfg(SCALING)).unwrap();
    let slope = r.ratio_slope.unwrap();
    let ratios: Vec<String> = r.rows.iter().map(|row| format!("L={}:{:.3}", row.layers, row.ratio)).collect();
    let zz = SCALING.replace(
        r#"{"kind": "random-pauli-sum", "count": 10, "coeff_range": [0.0, 1.0]}"#,
        r#"{"kind": "pauli-sum", "terms": [{"coeff": 1.0, "pauli": "ZZ"}]}"#,
    );
    let zz_slope = runners::qntk_stats(&cfg(&zz)).unwrap().ratio_slope.unwrap();
    Outcome {
        pass: (slope + 0.5).abs() <= 0.1,
        detail: format!(
            "slope of ln(ΔK/K̄) vs ln L = {slope:.3} (target −0.5 ± 0.1); ratios {}; diagnostic with O=ZZ: slope {zz_slope:.3}",
            ratios.join(" ")
        ),
    }
}

fn criterion_4() -> Outcome {
    let r = runners::train(&cfg(DECAY)).unwrap();
    let s = r.fit_summary();
    let ratio = s.ratio_to_exact.unwrap_or(f64::NAN);
    Outcome {
        pass: s.good_fits >= 45 && (ratio - 1.0).abs() <= 0.2,
        detail: format!(
            "R² > 0.99 in {}/{} trials (need ≥ 45); mean fitted γ {:.5} vs η·kbar_exact {:.5}, ratio {:.3} (need 0.8..1.2); {} diverged",
            s.good_fits,
            s.trials,
            s.mean_gamma.unwrap_or(f64::NAN),
            r.theory.gamma_exact,
            ratio,
            s.diverged
        ),
    }
}

fn criterion_5() -> Outcome {
    let r = runners::eigen_scan(&cfg(EIGEN)).unwrap();
    let dev = |v: f64, t: f64| ((v - t) / t).abs();
    let worst_mean_kernel = r.rows.iter().map(|w| dev(w.lowest_of_mean, w.theory_lowest)).fold(0.0, f64::max);
    let worst_per_instance = r.rows.iter().map(|w| dev(w.mean_lowest, w.theory_lowest)).fold(0.0, f64::max);
    let last = r.rows.last().unwrap();
    Outcome {
        pass: worst_mean_kernel <= 0.1 && (r.rows[0].theory_lowest - 7.055).abs() < 1e-3 && (last.theory_lowest - 3.0236).abs() < 1e-4,
        detail: format!(
            "lowest eigenvalue of the 50-instance mean kernel: max rel dev {:.3} (tol 0.10), |A|=10 {:.4} vs {:.4}; per-instance mean of lowest eigenvalues: max rel dev {:.3}",
            worst_mean_kernel, last.lowest_of_mean, last.theory_lowest, worst_per_instance
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for text in [HAAR_D2, HAAR_D4] {
        let c = cfg(text);
        let r = runners::haar_check(&c).unwrap();
        pass &= r.all_passed();
        for ch in &r.checks {
            lines.push(format!("D={} {}: z={:+.2} (attempts {})", c.dim(), ch.name, ch.z_score, ch.attempts));
        }
    }
    Outcome { pass, detail: lines.join("; ") }
}

fn criterion_7() -> Outcome {
    let r = runners::qntk_stats(&cfg(META)).unwrap();
    let row = &r.rows[0];
    let (mean, se) = (row.mean_mu.unwrap(), row.std_err_mu.unwrap());
    let z = mean / se;
    let random = META.replace(
        r#"{"kind": "pauli-sum", "terms": [{"coeff": 1.0, "pauli": "ZZ"}]}"#,
        r#"{"kind": "random-pauli-sum", "count": 10, "coeff_range": [0.0, 1.0]}"#,
    );
    let rr = runners::qntk_stats(&cfg(&random)).unwrap();
    let (rmean, rse) = (rr.rows[0].mean_mu.unwrap(), rr.rows[0].std_err_mu.unwrap());
    let tr3 = {
        let o = &rr.observable;
        let d = o.dim() as f64;
        let (t1, t2, t3) = (o.trace_moment(1), o.trace_moment(2), o.trace_moment(3));
        // Tr of the cube of the traceless part.
        t3 - 3.0 * t1 * t2 / d + 2.0 * t1.powi(3) / (d * d)
    };

    let h = 1e-4;
    let mut rng = RngStream::new(1, 7);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let n = 2 + k % 2;
        let a = build_random_ansatz(n, 4, true, &mut rng);
        let theta = ParameterVector::uniform(4, &mut rng);
        let obs = random_observable(n, &mut rng);
        let psi0 = Statevector::zero_state(n);
        let hess = hessian_residual(&a, &theta, &obs, &psi0).unwrap();
        let scale = hess.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..4 {
            for j in 0..4 {
                let eval = |di: f64, dj: f64| {
                    let mut t = theta.clone();
                    t.as_mut_slice()[i] += di;
                    t.as_mut_slice()[j] += dj;
                    residual_error(&a, &t, &obs, &psi0).unwrap()
                };
                let fd = (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h);
                worst = worst.max((hess[(i, j)] - fd).abs() / hess[(i, j)].abs().max(scale));
            }
        }
    }
    Outcome {
        pass: z.abs() <= 3.0 && worst <= 1e-4,
        detail: format!(
            "O=ZZ: mean μ {mean:.4} ± {se:.4} (z = {z:+.2}); Hessian vs finite differences on 20 configs: max rel err {worst:.2e} (tol 1e-4, relative to the largest entry); diagnostic with the random observable (traceless-part Tr O³ = {tr3:.2}): mean μ {rmean:.2} ± {rse:.2}"
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut rng = RngStream::new(1, 8);
    let (mut worst_eig, mut worst_asym) = (f64::INFINITY, 0.0f64);
    for k in 0..100 {
        let n = if k % 2 == 0 { 2 } else { 4 };
        let dim = 1usize << n;
        let size = 1 + k % dim;
        let a = build_random_ansatz(n, 16, true, &mut rng);
        let theta = ParameterVector::uniform(16, &mut rng);
        let obs = vec![random_observable(n, &mut rng), random_observable(n, &mut rng)];
        let prob =
            SupervisedProblem::with_basis_features(n, vec![vec![0.0, 0.0]; size], obs, (0..size).collect()).unwrap();
        let kern = supervised_kernel(&a, &theta, &prob).unwrap();
        worst_eig = worst_eig.min(kern.min_eigenvalue());
        worst_asym = worst_asym.max(kern.asymmetry());
    }
    Outcome {
        pass: worst_eig >= -1e-10 && worst_asym <= 1e-10,
        detail: format!(
            "100 instances: min eigenvalue {worst_eig:.3e} (≥ −1e-10), max asymmetry {worst_asym:.1e} (≤ 1e-10)"
        ),
    }
}

fn same_tree(a: &Path, b: &Path) -> Result<usize, String> {
    let fa = list_outputs(a).map_err(|e| e.to_string())?;
    let fb = list_outputs(b).map_err(|e| e.to_string())?;
    if fa != fb {
        return Err(format!("file lists differ under {}", a.display()));
    }
    for f in &fa {
        if fs::read(a.join(f)).ok() != fs::read(b.join(f)).ok() {
            return Err(format!("{} differs", f.display()));
        }
    }
    Ok(fa.len())
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut files = 0;
    let mut errors = Vec::new();
    for (name, text) in [
        ("kbar", KBAR_ZZ),
        ("scaling", SCALING),
        ("decay", DECAY),
        ("eigen", EIGEN),
        ("haar-d2", HAAR_D2),
        ("haar-d4", HAAR_D4),
        ("meta", META),
    ] {
        let c = cfg(text);
        let dirs: Vec<_> = [Some(1), Some(4), None]
            .iter()
            .enumerate()
            .map(|(i, &threads)| {
                let d = tmp.path().join(format!("{name}-{i}"));
                runners::run(&c, &d, threads).unwrap();
                d
            })
            .collect();
        for d in &dirs[1..] {
            match same_tree(&dirs[0], d) {
                Ok(n) => files += n,
                Err(e) => errors.push(format!("{name}: {e}")),
            }
        }
    }
    Outcome {
        pass: errors.is_empty(),
        detail: if errors.is_empty() {
            format!("7 acceptance configs rerun with 1, 4 and default threads; {files} file comparisons byte-identical")
        } else {
            errors.join("; ")
        },
    }
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 9] = [
        ("gradient oracle", criterion_1, Duration::from_secs(30)),
        ("frozen kernel mean", criterion_2, Duration::from_secs(60)),
        ("concentration scaling", criterion_3, Duration::from_secs(300)),
        ("exponential decay", criterion_4, Duration::from_secs(300)),
        ("supervised eigenvalue line", criterion_5, Duration::from_secs(600)),
        ("Haar moment identities", criterion_6, Duration::from_secs(120)),
        ("meta-kernel mean and Hessian", criterion_7, Duration::from_secs(300)),
        ("kernel PSD and symmetry", criterion_8, Duration::from_secs(600)),
        ("determinism", criterion_9, Duration::from_secs(600)),
    ];
    let mut failed = Vec::new();
    for (i, (name, f, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let pass = out.pass && took <= budget;
        println!(
            "criterion {} ({name}): {} [{:.1}s of {}s] {}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 9 criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
