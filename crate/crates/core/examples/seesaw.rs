//! Self-consistent fit when the prepared states are slightly off: alternate
//! measurement and state fits until the perturbation stops changing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdp_qmt::noise::coherent_noise;
use sdp_qmt::quantum::{pauli_eigenstate_ensemble, sic_povm};
use sdp_qmt::sampling::sample_frequencies;
use sdp_qmt::seesaw::{run_seesaw, seesaw_report, SeesawOptions};

fn main() -> sdp_qmt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let assumed = pauli_eigenstate_ensemble();
    let actual = coherent_noise(&assumed, 0.05, &mut rng)?;
    let freqs = sample_frequencies(&actual, &sic_povm(), 6_000_000, &mut rng)?;

    let trace = run_seesaw(&freqs, &assumed, &SeesawOptions::default())?;
    for step in &trace.steps {
        println!("{:>3} {} {:.4e}", step.index, step.side.name(), step.delta);
    }
    let summary = seesaw_report(&trace)?;
    println!(
        "{} steps, improvement {:.1}x, converged: {}",
        summary.total_steps, summary.improvement, summary.converged
    );
    Ok(())
}
