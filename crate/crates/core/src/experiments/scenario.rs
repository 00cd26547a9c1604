use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{load_ensemble, load_povm, EnsembleSource, ExperimentConfig, PovmSource, Scenario};
use crate::error::{QmtError, Result};
use crate::estimators::{fit_povm, FitOptions, FitReport, Method};
use crate::quantum::{
    pauli_eigenstate_ensemble, random_ic_ensemble, random_povm, sic_povm, trace_distance, Povm, StateEnsemble,
};
use crate::sampling::{exact_frequencies, sample_frequencies, FrequencyTable};
use crate::seesaw::{run_seesaw, SeesawOptions, SeesawTrace};

/// Independent random streams derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    States = 1,
    Povm = 2,
    Noise = 3,
    Sampling = 4,
}

/// Counter-based substream for one purpose, sweep cell and repetition.
/// Parallel and serial runs draw identical numbers.
pub fn stream_rng(master: u64, stream: Stream, cell: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((stream as u64) << 56) | ((cell as u64 & 0xff_ffff) << 32) | (rep as u64 & 0xffff_ffff));
    rng
}

/// Sample mean and standard deviation (`n − 1` denominator).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                count: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std, count: n }
    }
}

/// One simulated experiment: ground truth, assumed and actual states, data.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub true_povm: Povm,
    pub assumed_states: StateEnsemble,
    pub actual_states: StateEnsemble,
    pub frequencies: FrequencyTable,
}

/// Results of one successful repetition.
#[derive(Debug, Clone)]
pub struct RepetitionData {
    /// Headline value: `δ*` for single-delta, `Σ δ_jk` for many-deltas, the
    /// loss for least squares and log-likelihood, the final `δ` for see-saw.
    pub delta: f64,
    pub objective: Option<f64>,
    /// Mean over effects of the trace distance to the true effects.
    pub trace_distance: Option<f64>,
    pub per_state_delta: Option<Vec<f64>>,
    pub fit: Option<FitReport>,
    pub seesaw: Option<SeesawTrace>,
}

#[derive(Debug, Clone)]
pub struct RepetitionRecord {
    pub cell: usize,
    pub n_shots: u64,
    pub strength: f64,
    pub rep: usize,
    pub outcome: std::result::Result<RepetitionData, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: usize,
    pub n_shots: u64,
    pub strength: f64,
    pub n_ok: usize,
    pub n_failed: usize,
    pub delta: Stat,
    pub trace_distance: Stat,
    /// Per-state `δ_j` statistics, in ensemble order (many-deltas only).
    pub per_state_delta: Vec<Stat>,
    /// See-saw step counts.
    pub steps: Option<Stat>,
    pub converged_fraction: Option<f64>,
}

/// Outcome of a batch of repetitions.
#[derive(Debug, Clone)]
pub struct AggregateResult {
    pub scenario: Scenario,
    pub estimator: Method,
    pub labels: Vec<String>,
    pub records: Vec<RepetitionRecord>,
    pub cells: Vec<CellSummary>,
}

impl AggregateResult {
    pub fn total(&self) -> usize {
        self.records.len()
    }

    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| r.outcome.is_err()).count()
    }

    fn per_state_columns(&self) -> bool {
        self.estimator == Method::ManyDeltas && self.scenario != Scenario::Seesaw
    }

    fn is_seesaw(&self) -> bool {
        self.scenario == Scenario::Seesaw
    }

    /// Writes `repetitions.csv`: one row per repetition.
    pub fn write_repetitions_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = ["cell", "n_shots", "strength", "rep", "status", "delta", "objective", "trace_distance"]
            .map(String::from)
            .to_vec();
        if self.per_state_columns() {
            header.extend(self.labels.iter().map(|l| format!("delta_{l}")));
        }
        if self.is_seesaw() {
            header.extend(["initial_delta", "steps", "converged"].map(String::from));
        }
        header.push("error".into());
        w.write_record(&header)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.records {
            let mut row = vec![r.cell.to_string(), r.n_shots.to_string(), r.strength.to_string(), r.rep.to_string()];
            match &r.outcome {
                Ok(d) => {
                    row.push("ok".into());
                    row.push(d.delta.to_string());
                    row.push(opt(d.objective));
                    row.push(opt(d.trace_distance));
                    if self.per_state_columns() {
                        match &d.per_state_delta {
                            Some(p) => row.extend(p.iter().map(|v| v.to_string())),
                            None => row.extend(self.labels.iter().map(|_| String::new())),
                        }
                    }
                    if self.is_seesaw() {
                        let t = d.seesaw.as_ref();
                        row.push(opt(t.and_then(|t| t.steps.first().map(|s| s.delta))));
                        row.push(t.map(|t| t.steps.len().to_string()).unwrap_or_default());
                        row.push(t.map(|t| t.converged.to_string()).unwrap_or_default());
                    }
                    row.push(String::new());
                }
                Err(e) => {
                    row.push("failed".into());
                    let blanks = 3
                        + if self.per_state_columns() { self.labels.len() } else { 0 }
                        + if self.is_seesaw() { 3 } else { 0 };
                    row.extend(std::iter::repeat_n(String::new(), blanks));
                    row.push(e.clone());
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `aggregate.csv`: one row per sweep cell.
    pub fn write_aggregate_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = [
            "cell",
            "n_shots",
            "strength",
            "n_ok",
            "n_failed",
            "mean_delta",
            "std_delta",
            "mean_trace_distance",
            "std_trace_distance",
        ]
        .map(String::from)
        .to_vec();
        if self.per_state_columns() {
            for l in &self.labels {
                header.push(format!("mean_delta_{l}"));
                header.push(format!("std_delta_{l}"));
            }
        }
        if self.is_seesaw() {
            header.extend(["mean_steps", "converged_fraction"].map(String::from));
        }
        w.write_record(&header)?;
        let num = |v: f64| if v.is_nan() { String::new() } else { v.to_string() };
        for c in &self.cells {
            let mut row = vec![
                c.cell.to_string(),
                c.n_shots.to_string(),
                c.strength.to_string(),
                c.n_ok.to_string(),
                c.n_failed.to_string(),
                num(c.delta.mean),
                num(c.delta.std),
                num(c.trace_distance.mean),
                num(c.trace_distance.std),
            ];
            if self.per_state_columns() {
                for (j, _) in self.labels.iter().enumerate() {
                    let s = c.per_state_delta.get(j).copied().unwrap_or(Stat::of(&[]));
                    row.push(num(s.mean));
                    row.push(num(s.std));
                }
            }
            if self.is_seesaw() {
                row.push(c.steps.map(|s| num(s.mean)).unwrap_or_default());
                row.push(c.converged_fraction.map(num).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the CSV files (and see-saw traces) into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_repetitions_csv(fs::File::create(dir.join("repetitions.csv"))?)?;
        self.write_aggregate_csv(fs::File::create(dir.join("aggregate.csv"))?)?;
        if self.is_seesaw() {
            let sub = dir.join("seesaw");
            fs::create_dir_all(&sub)?;
            for r in &self.records {
                if let Ok(RepetitionData { seesaw: Some(t), .. }) = &r.outcome {
                    let path = sub.join(format!("cell{}_rep{}.csv", r.cell, r.rep));
                    t.write_csv(fs::File::create(path)?)?;
                }
            }
        }
        let summary = serde_json::json!({
            "scenario": self.scenario,
            "estimator": self.estimator,
            "labels": self.labels,
            "repetitions": self.total(),
            "failed": self.failed(),
            "cells": self.cells,
        });
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
        Ok(())
    }
}

/// Loaded file sources shared by all repetitions.
struct Sources {
    povm: Option<Povm>,
    ensemble: Option<StateEnsemble>,
}

impl Sources {
    fn load(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            povm: match &cfg.povm {
                PovmSource::File { path } => Some(load_povm(path)?),
                _ => None,
            },
            ensemble: match &cfg.ensemble {
                EnsembleSource::File { path } => Some(load_ensemble(path)?),
                _ => None,
            },
        })
    }
}

/// Sweep cells as `(n_shots, strength)` pairs.
pub fn sweep_cells(cfg: &ExperimentConfig) -> Vec<(u64, f64)> {
    let strengths = cfg.strength_sweep();
    cfg.n_shots
        .iter()
        .flat_map(|n| strengths.iter().map(move |s| (*n, *s)))
        .collect()
}

fn simulate_with(cfg: &ExperimentConfig, sources: &Sources, cell: usize, rep: usize) -> Result<Simulation> {
    let (n_shots, strength) = sweep_cells(cfg)[cell];
    let true_povm = match &cfg.povm {
        PovmSource::Sic => sic_povm(),
        PovmSource::Random { dim, outcomes } => {
            random_povm(*dim, *outcomes, &mut stream_rng(cfg.seed, Stream::Povm, 0, rep))?
        }
        PovmSource::File { .. } => sources.povm.clone().expect("loaded"),
    };
    let assumed_states = match &cfg.ensemble {
        EnsembleSource::Random { dim, states } => {
            random_ic_ensemble(*dim, *states, &mut stream_rng(cfg.seed, Stream::States, 0, rep))?
        }
        EnsembleSource::Pauli6 => pauli_eigenstate_ensemble(),
        EnsembleSource::File { .. } => sources.ensemble.clone().expect("loaded"),
    };
    let noise = cfg.noise.clone().with_strength(strength);
    let mut noise_rng = stream_rng(cfg.seed.wrapping_add(noise.seed), Stream::Noise, 0, rep);
    let actual_states = noise.apply(&assumed_states, &mut noise_rng)?;
    let frequencies = if n_shots == 0 {
        exact_frequencies(&actual_states, &true_povm)?
    } else {
        sample_frequencies(&actual_states, &true_povm, n_shots, &mut stream_rng(cfg.seed, Stream::Sampling, cell, rep))?
    };
    Ok(Simulation {
        true_povm,
        assumed_states,
        actual_states,
        frequencies,
    })
}

/// Generates the data of repetition `rep` in sweep cell `cell`.
///
/// States, POVM and noise draws depend on the repetition only, so every
/// cell of a sweep sees the same instances; shot sampling also depends on
/// the cell.
pub fn simulate_repetition(cfg: &ExperimentConfig, cell: usize, rep: usize) -> Result<Simulation> {
    simulate_with(cfg, &Sources::load(cfg)?, cell, rep)
}

pub(crate) fn mean_trace_distance(fitted: &Povm, truth: &Povm) -> Result<f64> {
    if fitted.len() != truth.len() {
        return Err(QmtError::Dimension("POVMs differ in outcome count".into()));
    }
    let mut total = 0.0;
    for (a, b) in fitted.effects().iter().zip(truth.effects()) {
        total += trace_distance(a, b)?;
    }
    Ok(total / truth.len() as f64)
}

fn fit_options(cfg: &ExperimentConfig) -> FitOptions {
    FitOptions {
        solver: cfg.solver,
        ..FitOptions::default()
    }
}

fn run_repetition(cfg: &ExperimentConfig, sources: &Sources, cell: usize, rep: usize) -> Result<RepetitionData> {
    if cfg.fail_repetitions.contains(&rep) {
        return Err(QmtError::Solver("injected failure".into()));
    }
    let sim = simulate_with(cfg, sources, cell, rep)?;
    let opts = fit_options(cfg);
    if cfg.scenario == Scenario::Seesaw {
        let sopts = SeesawOptions {
            nu_delta: cfg.seesaw.nu_delta,
            max_steps: cfg.seesaw.max_steps,
            fit: opts,
        };
        let trace = run_seesaw(&sim.frequencies, &sim.assumed_states, &sopts)?;
        if let Some(f) = &trace.failure {
            return Err(QmtError::Solver(f.clone()));
        }
        let delta = trace.final_delta().expect("successful run has steps");
        return Ok(RepetitionData {
            delta,
            objective: None,
            trace_distance: None,
            per_state_delta: None,
            fit: None,
            seesaw: Some(trace),
        });
    }
    let report = fit_povm(cfg.estimator, &sim.frequencies, &sim.assumed_states, &opts)?;
    let td = mean_trace_distance(report.povm()?, &sim.true_povm)?;
    Ok(RepetitionData {
        delta: report.delta_star.or(report.objective).unwrap_or(f64::NAN),
        objective: report.objective,
        trace_distance: Some(td),
        per_state_delta: report.per_state_delta.clone(),
        fit: Some(report),
        seesaw: None,
    })
}

fn summarize(cfg: &ExperimentConfig, cells: &[(u64, f64)], records: &[RepetitionRecord], n_labels: usize) -> Vec<CellSummary> {
    cells
        .iter()
        .enumerate()
        .map(|(ci, (n_shots, strength))| {
            let ok: Vec<&RepetitionData> = records
                .iter()
                .filter(|r| r.cell == ci)
                .filter_map(|r| r.outcome.as_ref().ok())
                .collect();
            let n_failed = records.iter().filter(|r| r.cell == ci && r.outcome.is_err()).count();
            let deltas: Vec<f64> = ok.iter().map(|d| d.delta).collect();
            let tds: Vec<f64> = ok.iter().filter_map(|d| d.trace_distance).collect();
            let per_state_delta = (0..n_labels)
                .map(|j| {
                    Stat::of(
                        &ok.iter()
                            .filter_map(|d| d.per_state_delta.as_ref().map(|p| p[j]))
                            .collect::<Vec<_>>(),
                    )
                })
                .filter(|s| s.count > 0)
                .collect();
            let (steps, converged_fraction) = if cfg.scenario == Scenario::Seesaw {
                let traces: Vec<&SeesawTrace> = ok.iter().filter_map(|d| d.seesaw.as_ref()).collect();
                let steps: Vec<f64> = traces.iter().map(|t| t.steps.len() as f64).collect();
                let conv = traces.iter().filter(|t| t.converged).count() as f64;
                let frac = if traces.is_empty() { f64::NAN } else { conv / traces.len() as f64 };
                (Some(Stat::of(&steps)), Some(frac))
            } else {
                (None, None)
            };
            CellSummary {
                cell: ci,
                n_shots: *n_shots,
                strength: *strength,
                n_ok: ok.len(),
                n_failed,
                delta: Stat::of(&deltas),
                trace_distance: Stat::of(&tds),
                per_state_delta,
                steps,
                converged_fraction,
            }
        })
        .collect()
}

/// Runs every repetition of every sweep cell in parallel and aggregates the
/// results in repetition order. Failed repetitions are recorded, not fatal.
/// Output files are written when `output_dir` is set.
pub fn run_scenario(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    cfg.validate()?;
    if cfg.scenario == Scenario::Bench {
        return Err(QmtError::Config("use run_bench for the bench scenario".into()));
    }
    let sources = Sources::load(cfg)?;
    let cells = sweep_cells(cfg);
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.repetitions).map(move |r| (c, r)))
        .collect();
    let records: Vec<RepetitionRecord> = tasks
        .par_iter()
        .map(|&(cell, rep)| RepetitionRecord {
            cell,
            n_shots: cells[cell].0,
            strength: cells[cell].1,
            rep,
            outcome: run_repetition(cfg, &sources, cell, rep).map_err(|e| e.to_string()),
        })
        .collect();
    let labels = match (&cfg.ensemble, &sources.ensemble) {
        (EnsembleSource::Pauli6, _) => pauli_eigenstate_ensemble().labels().unwrap().to_vec(),
        (EnsembleSource::File { .. }, Some(e)) => (0..e.len()).map(|j| e.label(j)).collect(),
        _ => (0..cfg.num_states()?).map(|j| j.to_string()).collect(),
    };
    let summary = summarize(cfg, &cells, &records, labels.len());
    let result = AggregateResult {
        scenario: cfg.scenario,
        estimator: cfg.estimator,
        labels,
        records,
        cells: summary,
    };
    if let Some(dir) = &cfg.output_dir {
        result.write_outputs(dir)?;
    }
    Ok(result)
}

/// Shot-noise study of the distance between fitted and true effects. Runs
/// the batch and, with an output directory, writes the scaling curve.
pub fn run_trace_distance_study(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    if cfg.scenario == Scenario::Seesaw || cfg.scenario == Scenario::Bench {
        return Err(QmtError::Config(
            "trace distances need a measurement fit against a known POVM".into(),
        ));
    }
    let result = run_scenario(cfg)?;
    if let Some(dir) = &cfg.output_dir {
        super::plot::emit_plotdata(&result, super::plot::PlotKind::TraceDistance, dir)?;
    }
    Ok(result)
}
