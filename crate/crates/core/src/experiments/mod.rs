//! Batch experiments: configs, repetition runner, bench, plot data and the
//! command layer behind the `qmt` binary.

mod bench;
mod commands;
mod config;
mod plot;
mod scenario;

pub use bench::{run_bench, BenchRow, BenchTable};
pub use commands::{exit_code, run_command, Command, CommandOutcome, Overrides};
pub use config::{
    load_ensemble, load_povm, BenchConfig, EnsembleSize, EnsembleSource, ExperimentConfig, PovmSource, Scenario,
    SeesawConfig, SCHEMA_VERSION,
};
pub use plot::{emit_bench_plotdata, emit_plotdata, PlotKind};
pub use scenario::{
    run_scenario, run_trace_distance_study, simulate_repetition, stream_rng, sweep_cells, AggregateResult,
    CellSummary, RepetitionData, RepetitionRecord, Simulation, Stat, Stream,
};
