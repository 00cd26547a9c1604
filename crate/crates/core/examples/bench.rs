//! Times the estimators on random qubit and qutrit problems.

use sdp_qmt::estimators::{FitOptions, Method};
use sdp_qmt::experiments::{run_bench, BenchConfig, EnsembleSize};

fn main() -> sdp_qmt::Result<()> {
    let bench = BenchConfig {
        dims: vec![2, 3],
        shots_per_state: vec![10_000],
        ensembles: vec![EnsembleSize::Complete, EnsembleSize::Overcomplete],
        methods: vec![Method::SingleDelta, Method::ManyDeltas, Method::LeastSquares, Method::LogMle],
    };
    let table = run_bench(&bench, 3, 42, &FitOptions::default())?;
    println!("{:<14} {:>3} {:<12} {:>10} {:>12}", "method", "d", "ensemble", "ms", "trace dist");
    for s in table.summaries() {
        println!(
            "{:<14} {:>3} {:<12} {:>10.2} {:>12.3e}",
            s.method.name(),
            s.dim,
            s.ensemble.name(),
            s.seconds.mean * 1e3,
            s.trace_distance.mean
        );
    }
    Ok(())
}
