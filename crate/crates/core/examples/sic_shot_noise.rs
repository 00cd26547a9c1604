//! Fits the qubit SIC-POVM from simulated data at increasing shot counts and
//! prints how the optimal perturbation and the effect error shrink.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdp_qmt::estimators::{fit_single_delta, FitOptions};
use sdp_qmt::quantum::{random_ic_ensemble, sic_povm, trace_distance};
use sdp_qmt::sampling::sample_frequencies;

fn main() -> sdp_qmt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let povm = sic_povm();
    let states = random_ic_ensemble(2, 4, &mut rng)?;
    println!("{:>10} {:>12} {:>14}", "shots", "delta", "max trace dist");
    for shots in [4_000u64, 40_000, 400_000, 4_000_000] {
        let freqs = sample_frequencies(&states, &povm, shots, &mut rng)?;
        let fit = fit_single_delta(&freqs, &states, &FitOptions::default())?;
        let fitted = fit.povm()?;
        let mut worst: f64 = 0.0;
        for (a, b) in fitted.effects().iter().zip(povm.effects()) {
            worst = worst.max(trace_distance(a, b)?);
        }
        println!("{shots:>10} {:>12.3e} {worst:>14.3e}", fit.delta_star.unwrap());
    }
    Ok(())
}
