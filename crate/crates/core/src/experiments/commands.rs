use std::fs;
use std::path::{Path, PathBuf};

use super::bench::run_bench;
use super::config::{load_ensemble, EnsembleSource, ExperimentConfig, Scenario};
use super::plot::{emit_bench_plotdata, emit_plotdata, PlotKind};
use super::scenario::{run_scenario, simulate_repetition, stream_rng, sweep_cells, AggregateResult, Stream};
use crate::error::{QmtError, Result};
use crate::estimators::{fit_povm, FitOptions};
use crate::quantum::{pauli_eigenstate_ensemble, random_ic_ensemble, StateEnsemble};
use crate::sampling::FrequencyTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Fit,
    Seesaw,
    Bench,
    Scenario,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub reps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommandOutcome {
    pub total: usize,
    pub failed: usize,
}

/// 0 on success, 1 for config errors, 2 when some repetitions failed, 3
/// when all failed or the run aborted.
pub fn exit_code(outcome: &Result<CommandOutcome>) -> i32 {
    match outcome {
        Err(QmtError::Config(_)) => 1,
        Err(_) => 3,
        Ok(o) if o.failed == 0 => 0,
        Ok(o) if o.failed < o.total => 2,
        Ok(_) => 3,
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = overrides.reps {
        cfg.repetitions = reps;
    }
    if let Some(out) = &overrides.out {
        cfg.output_dir = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("qmt-out"))
}

fn outcome_of(result: &AggregateResult) -> CommandOutcome {
    CommandOutcome {
        total: result.total(),
        failed: result.failed(),
    }
}

/// Runs a command against the config at `config_path`.
pub fn run_command(command: Command, config_path: &Path, overrides: &Overrides) -> Result<CommandOutcome> {
    let mut cfg = load(config_path, overrides)?;
    match command {
        Command::Simulate => simulate(&cfg),
        Command::Fit => fit(&cfg),
        Command::Bench => {
            let opts = FitOptions {
                solver: cfg.solver,
                ..FitOptions::default()
            };
            let table = run_bench(&cfg.bench, cfg.repetitions, cfg.seed, &opts)?;
            let dir = output_dir(&cfg);
            table.write_outputs(&dir)?;
            emit_bench_plotdata(&table, &dir.join("plots"))?;
            Ok(CommandOutcome {
                total: table.rows.len(),
                failed: table.failed(),
            })
        }
        Command::Seesaw | Command::Scenario => {
            if command == Command::Seesaw {
                cfg.scenario = Scenario::Seesaw;
                cfg.validate()?;
            }
            if cfg.scenario == Scenario::Bench {
                return run_command(Command::Bench, config_path, overrides);
            }
            cfg.output_dir = Some(output_dir(&cfg));
            let result = run_scenario(&cfg)?;
            let plots = output_dir(&cfg).join("plots");
            if result.failed() < result.total() {
                for kind in plot_kinds(&cfg, &result) {
                    emit_plotdata(&result, kind, &plots)?;
                }
            }
            Ok(outcome_of(&result))
        }
    }
}

fn plot_kinds(cfg: &ExperimentConfig, result: &AggregateResult) -> Vec<PlotKind> {
    match cfg.scenario {
        Scenario::Seesaw => vec![PlotKind::SeesawHistogram],
        Scenario::ShotNoise => vec![PlotKind::ShotNoise, PlotKind::TraceDistance],
        _ => {
            let mut kinds = vec![PlotKind::NoiseSweep];
            if result.cells.iter().any(|c| !c.per_state_delta.is_empty()) {
                kinds.push(PlotKind::PerState);
            }
            kinds
        }
    }
}

/// Writes ground truth and frequency tables for every repetition.
fn simulate(cfg: &ExperimentConfig) -> Result<CommandOutcome> {
    let dir = output_dir(cfg);
    fs::create_dir_all(&dir)?;
    let cells = sweep_cells(cfg);
    let mut failed = 0;
    for rep in 0..cfg.repetitions {
        for cell in 0..cells.len() {
            let sim = match simulate_repetition(cfg, cell, rep) {
                Ok(s) => s,
                Err(_) => {
                    failed += 1;
                    continue;
                }
            };
            if cell == 0 {
                fs::write(dir.join(format!("rep{rep}_povm.json")), serde_json::to_string_pretty(&sim.true_povm)?)?;
                fs::write(dir.join(format!("rep{rep}_states.json")), serde_json::to_string_pretty(&sim.assumed_states)?)?;
            }
            let stem = format!("cell{cell}_rep{rep}_frequencies");
            fs::write(dir.join(format!("{stem}.json")), serde_json::to_string(&sim.frequencies)?)?;
            sim.frequencies.write_csv(fs::File::create(dir.join(format!("{stem}.csv")))?)?;
        }
    }
    Ok(CommandOutcome {
        total: cells.len() * cfg.repetitions,
        failed,
    })
}

fn assumed_states(cfg: &ExperimentConfig) -> Result<StateEnsemble> {
    match &cfg.ensemble {
        EnsembleSource::Random { dim, states } => {
            random_ic_ensemble(*dim, *states, &mut stream_rng(cfg.seed, Stream::States, 0, 0))
        }
        EnsembleSource::Pauli6 => Ok(pauli_eigenstate_ensemble()),
        EnsembleSource::File { path } => load_ensemble(path),
    }
}

/// Fits the configured estimator to a stored frequency table.
fn fit(cfg: &ExperimentConfig) -> Result<CommandOutcome> {
    let path = cfg
        .frequencies_file
        .as_ref()
        .ok_or_else(|| QmtError::Config("fit needs frequencies_file".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| QmtError::Config(format!("cannot read {}: {e}", path.display())))?;
    let freqs: FrequencyTable = serde_json::from_str(&text).map_err(|e| QmtError::Config(e.to_string()))?;
    let states = assumed_states(cfg)?;
    let opts = FitOptions {
        solver: cfg.solver,
        ..FitOptions::default()
    };
    let report = fit_povm(cfg.estimator, &freqs, &states, &opts)?;
    let dir = output_dir(cfg);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("fit.json"), serde_json::to_string_pretty(&report)?)?;
    Ok(CommandOutcome { total: 1, failed: 0 })
}
