use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdp_qmt::estimators::{
    fit_least_squares, fit_log_mle, fit_many_deltas, fit_povm, fit_single_delta, fit_states_qst, linear_inversion,
    negative_log_likelihood, residual_table, FitOptions, Method,
};
use sdp_qmt::noise::rotation;
use sdp_qmt::quantum::{
    computational_basis_povm, pauli_eigenstate_ensemble, random_ic_ensemble, random_povm, sic_povm, DensityMatrix,
    HermitianOperator, Povm, StateEnsemble,
};
use sdp_qmt::sampling::{exact_frequencies, sample_frequencies, FrequencyTable};
use sdp_qmt::QmtError;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn residuals(freqs: &FrequencyTable, states: &StateEnsemble, povm: &Povm) -> DMatrix<f64> {
    residual_table(
        freqs,
        &states.states().iter().map(|s| s.op()).collect::<Vec<_>>(),
        &povm.effects().iter().collect::<Vec<_>>(),
    )
}

fn max_effect_error(a: &[HermitianOperator], b: &Povm) -> f64 {
    a.iter().zip(b.effects()).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max)
}

fn noisy_sic_instance(seed: u64, shots: u64) -> (StateEnsemble, Povm, FrequencyTable) {
    let mut r = rng(seed);
    let states = random_ic_ensemble(2, 4, &mut r).unwrap();
    let povm = sic_povm();
    let freqs = sample_frequencies(&states, &povm, shots, &mut r).unwrap();
    (states, povm, freqs)
}

#[test]
fn linear_inversion_recovers_exact_povms() {
    let mut r = rng(1);
    let povm = random_povm(2, 3, &mut r).unwrap();
    for states in [random_ic_ensemble(2, 4, &mut r).unwrap(), pauli_eigenstate_ensemble()] {
        let freqs = exact_frequencies(&states, &povm).unwrap();
        let effects = linear_inversion(&freqs, &states).unwrap();
        assert!(max_effect_error(&effects, &povm) < 1e-10);
    }
    let qutrit = random_povm(3, 4, &mut r).unwrap();
    let states = random_ic_ensemble(3, 12, &mut r).unwrap();
    let effects = linear_inversion(&exact_frequencies(&states, &qutrit).unwrap(), &states).unwrap();
    assert!(max_effect_error(&effects, &qutrit) < 1e-9);
}

#[test]
fn linear_inversion_can_leave_the_povm_set() {
    // With few shots the unconstrained solution eventually has a negative
    // eigenvalue, while the SDP fit on the same data stays positive.
    let found = (0..50u64).find_map(|seed| {
        let (states, _, freqs) = noisy_sic_instance(seed, 100);
        let effects = linear_inversion(&freqs, &states).unwrap();
        effects
            .iter()
            .any(|e| e.min_eigenvalue() < -1e-6)
            .then_some((states, freqs))
    });
    let (states, freqs) = found.expect("no seed gave a non-positive inversion");
    let fit = fit_single_delta(&freqs, &states, &FitOptions::default()).unwrap();
    for e in fit.povm().unwrap().effects() {
        assert!(e.min_eigenvalue() > -1e-8);
    }
}

#[test]
fn least_squares_fits() {
    let (states, povm, exact) = {
        let mut r = rng(2);
        let states = random_ic_ensemble(2, 4, &mut r).unwrap();
        let povm = random_povm(2, 4, &mut r).unwrap();
        let f = exact_frequencies(&states, &povm).unwrap();
        (states, povm, f)
    };
    let fit = fit_least_squares(&exact, &states, &FitOptions::default()).unwrap();
    assert!(fit.objective.unwrap() <= 1e-10);
    assert!(fit.povm().unwrap().effects().iter().zip(povm.effects()).all(|(a, b)| a.max_abs_diff(b) < 1e-4));

    for seed in 0..5 {
        let (states, povm, freqs) = noisy_sic_instance(seed, 400);
        let fit = fit_least_squares(&freqs, &states, &FitOptions::default()).unwrap();
        let at_truth: f64 = residuals(&freqs, &states, &povm).iter().map(|r| r * r).sum();
        assert!(fit.objective.unwrap() <= at_truth + 1e-9);
    }
}

#[test]
fn likelihood_fit() {
    let mut r = rng(3);
    let states = random_ic_ensemble(2, 4, &mut r).unwrap();
    let povm = random_povm(2, 3, &mut r).unwrap();
    let exact = exact_frequencies(&states, &povm).unwrap();
    let fit = fit_log_mle(&exact, &states, &FitOptions::default()).unwrap();
    let entropy: f64 = exact.frequencies().iter().filter(|f| **f > 0.0).map(|f| -f * f.ln()).sum();
    assert_abs_diff_eq!(fit.objective.unwrap(), entropy, epsilon = 1e-7);

    for seed in 10..13 {
        let (states, povm, freqs) = noisy_sic_instance(seed, 800);
        let mle = fit_log_mle(&freqs, &states, &FitOptions::default()).unwrap();
        let nll = negative_log_likelihood(&freqs, &states, mle.povm().unwrap()).unwrap();
        assert_abs_diff_eq!(nll, mle.objective.unwrap(), epsilon = 1e-9);
        let sdp = fit_single_delta(&freqs, &states, &FitOptions::default()).unwrap();
        assert!(nll <= negative_log_likelihood(&freqs, &states, sdp.povm().unwrap()).unwrap() + 1e-9);
        assert!(nll <= negative_log_likelihood(&freqs, &states, &povm).unwrap() + 1e-9);
    }
}

#[test]
fn single_delta_absorbs_a_known_perturbation() {
    let states = pauli_eigenstate_ensemble();
    let exact = exact_frequencies(&states, &sic_povm()).unwrap();
    let mut f = exact.frequencies().clone();
    f[(0, 0)] += 0.1;
    f[(0, 1)] -= 0.1;
    let freqs = FrequencyTable::from_probabilities(f).unwrap();
    let fit = fit_single_delta(&freqs, &states, &FitOptions::default()).unwrap();
    let d = fit.delta_star.unwrap();
    assert!(d > 1e-3 && d <= 0.1 + 1e-8, "{d}");
    assert_abs_diff_eq!(d, fit.max_abs_residual(), epsilon = 1e-7);
}

#[test]
fn single_delta_is_the_largest_residual() {
    for seed in 0..5 {
        let (states, _, freqs) = noisy_sic_instance(seed, 4000);
        let fit = fit_single_delta(&freqs, &states, &FitOptions::default()).unwrap();
        assert_abs_diff_eq!(fit.delta_star.unwrap(), fit.max_abs_residual(), epsilon = 1e-7);
    }
}

#[test]
fn many_deltas_reports_are_consistent() {
    let (states, _, freqs) = noisy_sic_instance(4, 4000);
    let fit = fit_many_deltas(&freqs, &states, &FitOptions::default()).unwrap();
    let m = fit.delta_matrix.as_ref().unwrap();
    let abs_res: f64 = fit.residual_table.iter().map(|r| r.abs()).sum();
    assert_abs_diff_eq!(fit.objective.unwrap(), abs_res, epsilon = 1e-6);
    for (j, p) in fit.per_state_delta.as_ref().unwrap().iter().enumerate() {
        assert_abs_diff_eq!(*p, m.row(j).mean(), epsilon = 1e-15);
    }
    let single = fit_single_delta(&freqs, &states, &FitOptions::default()).unwrap();
    assert!(m.max() >= single.delta_star.unwrap() - 1e-7);
}

#[test]
fn fits_are_unitarily_covariant() {
    // Rotating every input state leaves the attainable Born tables, and so
    // the optimal perturbation, unchanged.
    let (states, _, freqs) = noisy_sic_instance(6, 2000);
    let u = rotation(0.4, 1.3, 2.1);
    let rotated = states
        .with_states(
            states
                .states()
                .iter()
                .map(|s| DensityMatrix::new(s.op().conjugate_by(&u).unwrap()).unwrap())
                .collect(),
        )
        .unwrap();
    let a = fit_single_delta(&freqs, &states, &FitOptions::default()).unwrap();
    let b = fit_single_delta(&freqs, &rotated, &FitOptions::default()).unwrap();
    assert_abs_diff_eq!(a.delta_star.unwrap(), b.delta_star.unwrap(), epsilon = 1e-7);
}

#[test]
fn state_tomography() {
    let mut r = rng(7);
    let states = random_ic_ensemble(2, 4, &mut r).unwrap();
    let povm = sic_povm();
    let exact = exact_frequencies(&states, &povm).unwrap();
    let fit = fit_states_qst(&exact, &povm, &FitOptions::default()).unwrap();
    assert!(fit.delta_star.unwrap() < 1e-7);
    for (a, b) in fit.states().unwrap().states().iter().zip(states.states()) {
        assert!(a.op().max_abs_diff(b.op()) < 1e-5);
    }

    let z = computational_basis_povm(2);
    let table = FrequencyTable::from_probabilities(DMatrix::from_row_slice(1, 2, &[1.0, 0.0])).unwrap();
    assert!(matches!(
        fit_states_qst(&table, &z, &FitOptions::default()),
        Err(QmtError::NotInformationallyComplete { rank: 2, needed: 4 })
    ));
}

#[test]
fn state_tomography_unsharp_oracle() {
    // With effects diag(a, 1 − a) and diag(1 − a, a) the first outcome has
    // probability in [1 − a, a], so observing it always needs δ = 1 − a.
    let a = 0.8;
    let e0 = HermitianOperator::from_real(DMatrix::from_diagonal(&nalgebra::dvector![a, 1.0 - a])).unwrap();
    let e1 = HermitianOperator::identity(2).sub(&e0);
    let povm = Povm::new(vec![e0, e1]).unwrap();
    let table = FrequencyTable::from_probabilities(DMatrix::from_row_slice(1, 2, &[1.0, 0.0])).unwrap();
    let opts = FitOptions { require_ic: false, ..FitOptions::default() };
    let fit = fit_states_qst(&table, &povm, &opts).unwrap();
    assert_abs_diff_eq!(fit.delta_star.unwrap(), 1.0 - a, epsilon = 1e-7);
    let rho = &fit.states().unwrap().states()[0];
    assert_abs_diff_eq!(rho.op().matrix()[(0, 0)].re, 1.0, epsilon = 1e-5);
}

#[test]
fn input_checks() {
    let states = pauli_eigenstate_ensemble();
    let freqs = exact_frequencies(&states, &sic_povm()).unwrap();
    let short = StateEnsemble::new(states.states()[..4].to_vec()).unwrap();
    assert!(matches!(
        fit_single_delta(&freqs, &short, &FitOptions::default()),
        Err(QmtError::Dimension(_))
    ));
    let z_states = StateEnsemble::new(vec![states.states()[4].clone(), states.states()[5].clone()]).unwrap();
    let z_freqs = exact_frequencies(&z_states, &sic_povm()).unwrap();
    assert!(matches!(
        fit_many_deltas(&z_freqs, &z_states, &FitOptions::default()),
        Err(QmtError::NotInformationallyComplete { rank: 2, needed: 4 })
    ));
    let lax = FitOptions { require_ic: false, ..FitOptions::default() };
    assert!(fit_single_delta(&z_freqs, &z_states, &lax).unwrap().delta_star.unwrap() < 1e-7);
    assert!(fit_povm(Method::LinearInversion, &freqs, &states, &lax).is_err());
    assert_eq!(fit_povm(Method::ManyDeltas, &freqs, &states, &lax).unwrap().method, Method::ManyDeltas);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exact_data_needs_no_perturbation(seed in any::<u64>(), m in 2usize..5) {
        let mut r = rng(seed);
        let states = random_ic_ensemble(2, 4, &mut r).unwrap();
        let povm = random_povm(2, m, &mut r).unwrap();
        let freqs = exact_frequencies(&states, &povm).unwrap();
        let fit = fit_single_delta(&freqs, &states, &FitOptions::default()).unwrap();
        prop_assert!(fit.delta_star.unwrap() < 1e-6);
        let total: HermitianOperator = fit
            .povm()
            .unwrap()
            .effects()
            .iter()
            .fold(HermitianOperator::zeros(2), |acc, e| acc.add(e));
        prop_assert!(total.max_abs_diff(&HermitianOperator::identity(2)) < 1e-7);
    }
}
