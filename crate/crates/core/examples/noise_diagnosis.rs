//! Rotates one of the six Pauli eigenstates and lets the per-entry fit point
//! at it. Each antipodal pair sums to the identity, so the fit can move the
//! error between partners and the whole x pair stands out.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdp_qmt::estimators::{fit_many_deltas, FitOptions};
use sdp_qmt::noise::NoiseSpec;
use sdp_qmt::quantum::{pauli_eigenstate_ensemble, sic_povm};
use sdp_qmt::sampling::sample_frequencies;

fn main() -> sdp_qmt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let assumed = pauli_eigenstate_ensemble();
    let actual = NoiseSpec::coherent(0.1).with_targets(["+x"]).apply(&assumed, &mut rng)?;
    let freqs = sample_frequencies(&actual, &sic_povm(), 6_000_000, &mut rng)?;
    let fit = fit_many_deltas(&freqs, &assumed, &FitOptions::default())?;
    for (j, d) in fit.per_state_delta.unwrap().iter().enumerate() {
        println!("{:>3}  {d:.3e}", assumed.label(j));
    }
    Ok(())
}
