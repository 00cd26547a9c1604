//! Runs a noise-strength sweep from a config file and writes the CSV
//! outputs and plot data.
//!
//! ```text
//! cargo run --release --example scenario_batch -- configs/incoherent.json
//! ```

use std::path::PathBuf;

use sdp_qmt::experiments::{emit_plotdata, run_scenario, ExperimentConfig, PlotKind};

fn main() -> sdp_qmt::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/incoherent.json".into());
    let mut cfg = ExperimentConfig::from_file(path.as_ref())?;
    let out = cfg.output_dir.get_or_insert_with(|| PathBuf::from("qmt-out")).clone();
    let result = run_scenario(&cfg)?;
    for c in &result.cells {
        println!(
            "strength {:<6} shots {:<8} delta {:.3e} ± {:.1e}  ({} failed)",
            c.strength, c.n_shots, c.delta.mean, c.delta.std, c.n_failed
        );
    }
    emit_plotdata(&result, PlotKind::NoiseSweep, &out.join("plots"))?;
    println!("wrote {}", out.display());
    Ok(())
}
