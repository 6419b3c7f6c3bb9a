// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use qntk_core::{
    build_random_ansatz, gradient, qntk, supervised_kernel, Observable, ParameterVector, RngStream, Statevector,
    SupervisedProblem,
};

fn zz(n: usize) -> Observable {
    let mut s = String::from("ZZ");
    s.push_str(&"I".repeat(n - 2));
    Observable::pauli(s.parse().unwrap(), 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn supervised_kernel_is_symmetric_psd(seed in any::<u64>(), big in any::<bool>(), frac in 0.0f64..1.0) {
        let n = if big { 4 } else { 2 };
        let dim = 1usize << n;
        let size = 1 + (frac * dim as f64) as usize % dim;
        let mut rng = RngStream::new(seed, 0);
        let a = build_random_ansatz(n, 12, true, &mut rng);
        let theta = ParameterVector::uniform(12, &mut rng);
        let obs = vec![zz(n), Observable::random_pauli_sum(n, 4, (-1.0, 1.0), 0.0, &mut rng).unwrap()];
        let labels = vec![vec![0.0, 0.0]; size];
        let prob = SupervisedProblem::with_basis_features(n, labels, obs, (0..size).collect()).unwrap();
        let k = supervised_kernel(&a, &theta, &prob).unwrap();
        prop_assert_eq!(k.dim(), 2 * size);
        prop_assert!(k.asymmetry() <= 1e-10);
        prop_assert!(k.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn qntk_is_permutation_invariant_and_nonnegative(mut g in proptest::collection::vec(-10.0f64..10.0, 0..20)) {
        let k = qntk(&g);
        prop_assert!(k >= 0.0);
        g.reverse();
        prop_assert!((qntk(&g) - k).abs() <= 1e-12 * k.max(1.0));
    }
}

#[test]
fn single_sample_kernel_is_qntk() {
    let mut rng = RngStream::new(61, 0);
    let a = build_random_ansatz(2, 10, true, &mut rng);
    let theta = ParameterVector::uniform(10, &mut rng);
    let prob = SupervisedProblem::with_basis_features(2, vec![vec![0.0]], vec![zz(2)], vec![0]).unwrap();
    let k = supervised_kernel(&a, &theta, &prob).unwrap();
    let g = gradient(&a, &theta, &zz(2), &Statevector::zero_state(2)).unwrap();
    assert_eq!(k.dim(), 1);
    assert_eq!(k.get(0, 0), qntk(&g));
}

#[test]
fn duplicated_sample_gives_equal_rows() {
    let mut rng = RngStream::new(62, 0);
    let a = build_random_ansatz(2, 10, true, &mut rng);
    let theta = ParameterVector::uniform(10, &mut rng);
    let psi = Statevector::basis(2, 1);
    let prob =
        SupervisedProblem::new(vec![psi.clone(), psi], vec![vec![0.0], vec![0.0]], vec![zz(2)], vec![0, 1]).unwrap();
    let k = supervised_kernel(&a, &theta, &prob).unwrap();
    assert_eq!(k.get(0, 0), k.get(0, 1));
    assert_eq!(k.get(1, 0), k.get(1, 1));
    assert!(k.min_eigenvalue().abs() < 1e-10);
}

#[test]
fn oversized_training_set_is_rejected() {
    let labels = vec![vec![0.0]; 5];
    assert!(SupervisedProblem::with_basis_features(2, labels, vec![zz(2)], (0..5).collect()).is_err());
}
