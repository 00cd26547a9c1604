//! Runs every POVM estimator on the same noisy data set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdp_qmt::estimators::{fit_povm, linear_inversion, FitOptions, Method};
use sdp_qmt::quantum::{pauli_eigenstate_ensemble, random_povm, trace_distance};
use sdp_qmt::sampling::sample_frequencies;

fn main() -> sdp_qmt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let povm = random_povm(2, 4, &mut rng)?;
    let states = pauli_eigenstate_ensemble();
    let freqs = sample_frequencies(&states, &povm, 600, &mut rng)?;

    let raw = linear_inversion(&freqs, &states)?;
    let min_eig = raw.iter().map(|e| e.min_eigenvalue()).fold(f64::INFINITY, f64::min);
    println!("linear inversion: smallest effect eigenvalue {min_eig:.3e}");

    let opts = FitOptions::default();
    for method in [Method::SingleDelta, Method::ManyDeltas, Method::LeastSquares, Method::LogMle] {
        let fit = fit_povm(method, &freqs, &states, &opts)?;
        let mut err: f64 = 0.0;
        for (a, b) in fit.povm()?.effects().iter().zip(povm.effects()) {
            err = err.max(trace_distance(a, b)?);
        }
        println!(
            "{:>15}: objective {:.4e}, max trace distance {err:.3e}, {:.1} ms",
            method.name(),
            fit.objective.unwrap_or(f64::NAN),
            fit.solve_time.as_secs_f64() * 1e3
        );
    }
    Ok(())
}
