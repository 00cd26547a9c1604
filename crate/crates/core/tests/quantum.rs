use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdp_qmt::quantum::{
    born_probabilities, computational_basis_povm, operator_rank, pauli_eigenstate_ensemble, pure_state,
    random_density_matrix, random_ic_ensemble, random_povm, sic_povm, trace_distance, DensityMatrix,
    HermitianOperator, Povm, StateEnsemble,
};
use sdp_qmt::QmtError;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn sic_born_row_for_plus_x() {
    let s = 0.5f64.sqrt();
    let plus_x = pure_state(&[c(s), c(s)]).unwrap();
    let ens = StateEnsemble::new(vec![plus_x]).unwrap();
    let p = born_probabilities(&ens, &sic_povm()).unwrap();
    let r2 = 2f64.sqrt();
    let expected = [0.25, 0.25 + r2 / 6.0, 0.25 - r2 / 12.0, 0.25 - r2 / 12.0];
    for (k, e) in expected.iter().enumerate() {
        assert_abs_diff_eq!(p[(0, k)], e, epsilon = 1e-12);
    }
}

#[test]
fn sic_effects_are_symmetric() {
    let povm = sic_povm();
    let first = povm.effects()[0].matrix();
    assert_abs_diff_eq!(first[(0, 0)].re, 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(first[(1, 1)].re, 0.0, epsilon = 1e-15);
    for (k, a) in povm.effects().iter().enumerate() {
        assert_abs_diff_eq!(a.trace(), 0.5, epsilon = 1e-14);
        for b in &povm.effects()[k + 1..] {
            assert_abs_diff_eq!(a.inner(b), 1.0 / 12.0, epsilon = 1e-14);
        }
    }
    assert!(povm.is_informationally_complete());
}

#[test]
fn maximally_mixed_state_sees_uniform_sic() {
    let ens = StateEnsemble::new(vec![DensityMatrix::maximally_mixed(2)]).unwrap();
    let p = born_probabilities(&ens, &sic_povm()).unwrap();
    assert!(p.iter().all(|v| (v - 0.25).abs() < 1e-14));
    let z = StateEnsemble::new(vec![pure_state(&[c(1.0), c(0.0)]).unwrap()]).unwrap();
    let p = born_probabilities(&z, &computational_basis_povm(2)).unwrap();
    assert_eq!((p[(0, 0)], p[(0, 1)]), (1.0, 0.0));
}

#[test]
fn pauli_ensemble_has_rank_four() {
    let ens = pauli_eigenstate_ensemble();
    assert_eq!(ens.len(), 6);
    assert_eq!(ens.ic_rank(), 4);
    let plus_x = ens.states()[ens.index_of("+x").unwrap()].op();
    assert!(plus_x.matrix().iter().all(|v| (v - c(0.5)).norm() < 1e-15));
    let plus_z = ens.states()[ens.index_of("+z").unwrap()].op();
    assert_abs_diff_eq!(plus_z.matrix()[(0, 0)].re, 1.0);

    // Independent rank check: SVD of the real coordinate matrix (Re, Im of entries).
    let rows: Vec<f64> = ens
        .states()
        .iter()
        .flat_map(|s| s.op().matrix().iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>())
        .collect();
    let m = DMatrix::from_row_slice(6, 8, &rows);
    assert_eq!(m.rank(1e-10), 4);
}

#[test]
fn hilbert_schmidt_mean_purity() {
    // Mean purity of the Hilbert-Schmidt ensemble is 2d / (d² + 1) = 0.8 for d = 2.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 10_000;
    let mean = (0..n).map(|_| random_density_matrix(2, &mut rng).unwrap().purity()).sum::<f64>() / n as f64;
    assert!((mean - 0.8).abs() < 0.01, "mean purity {mean}");
}

#[test]
fn random_generators_respect_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let rho = random_density_matrix(2, &mut rng).unwrap();
        assert!(rho.op().min_eigenvalue() > 0.0);
        let povm = random_povm(2, 4, &mut rng).unwrap();
        let mut sum = HermitianOperator::zeros(2);
        for e in povm.effects() {
            sum.add_scaled(1.0, e);
        }
        assert!(sum.max_abs_diff(&HermitianOperator::identity(2)) < 1e-10);
    }
}

#[test]
fn generators_are_reproducible() {
    let a = random_povm(2, 4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = random_povm(2, 4, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
    let a = random_density_matrix(3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = random_density_matrix(3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ensemble_preconditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(matches!(random_ic_ensemble(2, 3, &mut rng), Err(QmtError::InvalidArgument(_))));
    assert!(random_povm(2, 1, &mut rng).is_err());
    let ens = random_ic_ensemble(3, 9, &mut rng).unwrap();
    let ops: Vec<&HermitianOperator> = ens.states().iter().map(|s| s.op()).collect();
    assert_eq!(operator_rank(&ops), 9);
}

#[test]
fn trace_distance_examples() {
    let zero = pure_state(&[c(1.0), c(0.0)]).unwrap().into_op();
    let one = pure_state(&[c(0.0), c(1.0)]).unwrap().into_op();
    let mixed = DensityMatrix::maximally_mixed(2).into_op();
    assert_abs_diff_eq!(trace_distance(&zero, &one).unwrap(), 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(trace_distance(&zero, &zero).unwrap(), 0.0);
    assert_abs_diff_eq!(trace_distance(&mixed, &zero).unwrap(), 0.5, epsilon = 1e-14);
    assert!(trace_distance(&zero, &HermitianOperator::identity(3)).is_err());
}

#[test]
fn povm_validation() {
    let half = HermitianOperator::identity(2).scale(0.5);
    assert!(Povm::new(vec![half.clone(), half.clone()]).is_ok());
    assert!(Povm::new(vec![half.clone(), half.scale(0.9)]).is_err());
    let neg = HermitianOperator::from_real(DMatrix::from_diagonal(&DVector::from_vec(vec![1.1, 0.5]))).unwrap();
    let rest = HermitianOperator::identity(2).sub(&neg);
    assert!(Povm::new(vec![neg, rest]).is_err());
}

#[test]
fn povm_json_round_trip() {
    let povm = random_povm(2, 3, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let text = serde_json::to_string(&povm).unwrap();
    let back: Povm = serde_json::from_str(&text).unwrap();
    for (a, b) in povm.effects().iter().zip(back.effects()) {
        assert!(a.max_abs_diff(b) < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [a, b, c] = [0, 1, 2].map(|_| random_density_matrix(3, &mut rng).unwrap().into_op());
        let ab = trace_distance(&a, &b).unwrap();
        let bc = trace_distance(&b, &c).unwrap();
        let ac = trace_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-10);
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn born_rows_are_normalized(seed in any::<u64>(), n in 4usize..8, m in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ens = random_ic_ensemble(2, n, &mut rng).unwrap();
        let povm = random_povm(2, m, &mut rng).unwrap();
        let p = born_probabilities(&ens, &povm).unwrap();
        for j in 0..n {
            prop_assert!((p.row(j).sum() - 1.0).abs() < 1e-9);
        }
    }
}
