use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdp_qmt::noise::coherent_noise;
use sdp_qmt::quantum::{born_probabilities, pauli_eigenstate_ensemble, random_ic_ensemble, sic_povm, StateEnsemble};
use sdp_qmt::sampling::{exact_frequencies, sample_frequencies};
use sdp_qmt::seesaw::{run_seesaw, seesaw_report, SeesawOptions, SeesawStep, SeesawTrace, Side};
use sdp_qmt::QmtError;

#[test]
fn consistent_data_stops_after_one_round() {
    let states = pauli_eigenstate_ensemble();
    let freqs = exact_frequencies(&states, &sic_povm()).unwrap();
    let trace = run_seesaw(&freqs, &states, &SeesawOptions::default()).unwrap();
    assert!(trace.converged);
    assert_eq!(trace.steps.len(), 2);
    assert_eq!(trace.steps[0].side, Side::Qmt);
    assert_eq!(trace.steps[1].side, Side::Qst);
    assert!(trace.deltas().iter().all(|d| *d < 1e-7));
    assert_eq!(trace.final_povm_step, Some(0));
    assert_eq!(trace.final_states_step, Some(1));
}

fn coherent_instance(seed: u64, epsilon: f64) -> (StateEnsemble, sdp_qmt::sampling::FrequencyTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assumed = pauli_eigenstate_ensemble();
    let actual = coherent_noise(&assumed, epsilon, &mut rng).unwrap();
    let freqs = sample_frequencies(&actual, &sic_povm(), 600_000, &mut rng).unwrap();
    (assumed, freqs)
}

#[test]
fn alternation_lowers_delta_and_keeps_born_consistency() {
    let (assumed, freqs) = coherent_instance(3, 0.1);
    let trace = run_seesaw(&freqs, &assumed, &SeesawOptions::default()).unwrap();
    assert!(trace.failure.is_none(), "{:?}", trace.failure);
    for (i, s) in trace.steps.iter().enumerate() {
        assert_eq!(s.index, i);
        assert_eq!(s.side, if i % 2 == 0 { Side::Qmt } else { Side::Qst });
    }
    let d = trace.deltas();
    for w in d.windows(2) {
        assert!(w[1] <= w[0] + 1e-7, "{d:?}");
    }
    let summary = seesaw_report(&trace).unwrap();
    assert!(summary.final_delta <= summary.initial_delta);

    // The last pair of operators reproduces the data within the last delta
    // pair's larger value.
    let probs = born_probabilities(&trace.final_states, trace.final_povm.as_ref().unwrap()).unwrap();
    let worst = (probs - freqs.frequencies()).amax();
    let tail = d[d.len().saturating_sub(2)..].iter().cloned().fold(0.0, f64::max);
    assert!(worst <= tail + 1e-6, "{worst} > {tail}");
}

#[test]
fn large_improvement_on_exact_rotated_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let assumed = random_ic_ensemble(2, 4, &mut rng).unwrap();
    let actual = coherent_noise(&assumed, 0.2, &mut rng).unwrap();
    let freqs = exact_frequencies(&actual, &sic_povm()).unwrap();
    let opts = SeesawOptions { nu_delta: 1e-9, ..SeesawOptions::default() };
    let trace = run_seesaw(&freqs, &assumed, &opts).unwrap();
    let summary = seesaw_report(&trace).unwrap();
    assert!(summary.initial_delta > 1e-3);
    assert!(summary.improvement >= 1e2, "{summary:?}");
}

#[test]
fn runs_are_deterministic() {
    let (assumed, freqs) = coherent_instance(5, 0.05);
    let a = run_seesaw(&freqs, &assumed, &SeesawOptions::default()).unwrap();
    let b = run_seesaw(&freqs, &assumed, &SeesawOptions::default()).unwrap();
    assert_eq!(a.deltas(), b.deltas());
}

#[test]
fn rejects_bad_inputs() {
    let states = pauli_eigenstate_ensemble();
    let freqs = exact_frequencies(&states, &sic_povm()).unwrap();
    let z = StateEnsemble::new(states.states()[4..].to_vec()).unwrap();
    let z_freqs = exact_frequencies(&z, &sic_povm()).unwrap();
    assert!(matches!(
        run_seesaw(&z_freqs, &z, &SeesawOptions::default()),
        Err(QmtError::NotInformationallyComplete { .. })
    ));
    assert!(matches!(run_seesaw(&freqs, &z, &SeesawOptions::default()), Err(QmtError::Dimension(_))));
    let zero = SeesawOptions { max_steps: 0, ..SeesawOptions::default() };
    assert!(run_seesaw(&freqs, &states, &zero).is_err());
}

fn manual_trace(deltas: &[f64]) -> SeesawTrace {
    SeesawTrace {
        steps: deltas
            .iter()
            .enumerate()
            .map(|(index, &delta)| SeesawStep {
                index,
                side: if index % 2 == 0 { Side::Qmt } else { Side::Qst },
                delta,
                solve_time: Duration::ZERO,
            })
            .collect(),
        final_states: pauli_eigenstate_ensemble(),
        final_states_step: None,
        final_povm: None,
        final_povm_step: None,
        converged: true,
        nu_delta: 1e-7,
        failure: None,
    }
}

#[test]
fn report_summarizes_a_trace() {
    let s = seesaw_report(&manual_trace(&[0.02, 0.001, 0.0002])).unwrap();
    assert_eq!(s.total_steps, 3);
    assert!((s.improvement - 100.0).abs() < 1e-9);
    assert_eq!(seesaw_report(&manual_trace(&[0.1, 0.0])).unwrap().improvement, f64::INFINITY);
    assert!(seesaw_report(&manual_trace(&[])).is_err());

    let mut csv = Vec::new();
    manual_trace(&[0.5, 0.25]).write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap(), "step,side,delta\n0,QMT,0.5\n1,QST,0.25\n");
}
