use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{BenchConfig, EnsembleSize};
use super::scenario::{mean_trace_distance, stream_rng, Stat, Stream};
use crate::error::Result;
use crate::estimators::{fit_povm, FitOptions, Method};
use crate::quantum::{random_ic_ensemble, random_povm};
use crate::sampling::sample_frequencies;

/// Timing and accuracy of one estimator on one instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub dim: usize,
    pub ensemble: EnsembleSize,
    pub n_states: usize,
    pub shots_per_state: u64,
    pub rep: usize,
    pub seconds: f64,
    pub trace_distance: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

/// Mean wall time and trace distance for one method and instance class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSummary {
    pub method: Method,
    pub dim: usize,
    pub ensemble: EnsembleSize,
    pub shots_per_state: u64,
    pub seconds: Stat,
    pub trace_distance: Stat,
    pub failed: usize,
}

impl BenchTable {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn summaries(&self) -> Vec<BenchSummary> {
        let mut keys: Vec<(Method, usize, EnsembleSize, u64)> = Vec::new();
        for r in &self.rows {
            let k = (r.method, r.dim, r.ensemble, r.shots_per_state);
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
        keys.into_iter()
            .map(|(method, dim, ensemble, shots)| {
                let rows: Vec<&BenchRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.method == method && r.dim == dim && r.ensemble == ensemble && r.shots_per_state == shots)
                    .collect();
                let ok: Vec<&&BenchRow> = rows.iter().filter(|r| r.error.is_none()).collect();
                BenchSummary {
                    method,
                    dim,
                    ensemble,
                    shots_per_state: shots,
                    seconds: Stat::of(&ok.iter().map(|r| r.seconds).collect::<Vec<_>>()),
                    trace_distance: Stat::of(&ok.iter().filter_map(|r| r.trace_distance).collect::<Vec<_>>()),
                    failed: rows.len() - ok.len(),
                }
            })
            .collect()
    }

    /// `bench.csv`, one row per fit, timings included.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "method",
            "dim",
            "ensemble",
            "n_states",
            "shots_per_state",
            "rep",
            "status",
            "seconds",
            "trace_distance",
            "error",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.method.name().to_string(),
                r.dim.to_string(),
                r.ensemble.name().to_string(),
                r.n_states.to_string(),
                r.shots_per_state.to_string(),
                r.rep.to_string(),
                if r.error.is_none() { "ok" } else { "failed" }.to_string(),
                r.seconds.to_string(),
                r.trace_distance.map(|v| v.to_string()).unwrap_or_default(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_csv(fs::File::create(dir.join("bench.csv"))?)?;
        fs::write(dir.join("bench_summary.json"), serde_json::to_string_pretty(&self.summaries())?)?;
        Ok(())
    }
}

/// Times every configured method on random instances: a random
/// `d²`-outcome POVM, a random IC ensemble of the configured size and
/// multinomial data. Fits run one at a time so timings are not skewed by
/// contention.
pub fn run_bench(bench: &BenchConfig, repetitions: usize, seed: u64, opts: &FitOptions) -> Result<BenchTable> {
    let mut table = BenchTable::default();
    let mut cell = 0;
    for &dim in &bench.dims {
        for &ensemble in &bench.ensembles {
            let n_states = ensemble.states(dim);
            for &shots in &bench.shots_per_state {
                for rep in 0..repetitions {
                    let povm = random_povm(dim, dim * dim, &mut stream_rng(seed, Stream::Povm, cell, rep))?;
                    let states = random_ic_ensemble(dim, n_states, &mut stream_rng(seed, Stream::States, cell, rep))?;
                    let freqs =
                        sample_frequencies(&states, &povm, shots * n_states as u64, &mut stream_rng(seed, Stream::Sampling, cell, rep))?;
                    for &method in &bench.methods {
                        let start = Instant::now();
                        let fit = fit_povm(method, &freqs, &states, opts);
                        let seconds = start.elapsed().as_secs_f64();
                        let (trace_distance, error) = match fit.and_then(|f| mean_trace_distance(f.povm()?, &povm)) {
                            Ok(td) => (Some(td), None),
                            Err(e) => (None, Some(e.to_string())),
                        };
                        table.rows.push(BenchRow {
                            method,
                            dim,
                            ensemble,
                            n_states,
                            shots_per_state: shots,
                            rep,
                            seconds,
                            trace_distance,
                            error,
                        });
                    }
                }
                cell += 1;
            }
        }
    }
    Ok(table)
}
