use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bench::BenchTable;
use super::scenario::{AggregateResult, RepetitionData};
use crate::error::{QmtError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// Mean headline value against total shots.
    ShotNoise,
    /// Mean effect trace distance against total shots.
    TraceDistance,
    /// Mean headline value against noise strength.
    NoiseSweep,
    /// Per-state `δ_j` against noise strength.
    PerState,
    /// Histogram of `log10` final see-saw values.
    SeesawHistogram,
}

impl PlotKind {
    fn stem(self) -> &'static str {
        match self {
            PlotKind::ShotNoise => "shot_noise",
            PlotKind::TraceDistance => "trace_distance",
            PlotKind::NoiseSweep => "noise_sweep",
            PlotKind::PerState => "per_state",
            PlotKind::SeesawHistogram => "seesaw_histogram",
        }
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    kind: &'a str,
    data_file: String,
    columns: Vec<String>,
    x: &'a str,
    y: &'a str,
    log_x: bool,
    log_y: bool,
}

fn write_table(dir: &Path, stem: &str, columns: &[String], rows: &[Vec<String>], sidecar: Sidecar) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut text = format!("# {}\n", columns.join(" "));
    for row in rows {
        let _ = writeln!(text, "{}", row.join(" "));
    }
    let dat = dir.join(format!("{stem}.dat"));
    fs::write(&dat, text)?;
    let json = dir.join(format!("{stem}.json"));
    fs::write(&json, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(vec![dat, json])
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Writes a whitespace-separated `.dat` table with a `#` header line and a
/// JSON sidecar naming the columns and suggested axes. Returns the paths.
pub fn emit_plotdata(result: &AggregateResult, kind: PlotKind, dir: &Path) -> Result<Vec<PathBuf>> {
    let stem = kind.stem();
    let side = |columns: &[String], x, y, log_x, log_y| Sidecar {
        kind: stem,
        data_file: format!("{stem}.dat"),
        columns: columns.to_vec(),
        x,
        y,
        log_x,
        log_y,
    };
    match kind {
        PlotKind::ShotNoise | PlotKind::TraceDistance | PlotKind::NoiseSweep => {
            let (x, y) = match kind {
                PlotKind::ShotNoise => ("n_shots", "mean_delta"),
                PlotKind::TraceDistance => ("n_shots", "mean_trace_distance"),
                _ => ("strength", "mean_delta"),
            };
            let columns = cols(&["n_shots", "strength", y, &y.replace("mean", "std"), "n_ok"]);
            let rows = result
                .cells
                .iter()
                .map(|c| {
                    let s = if kind == PlotKind::TraceDistance { c.trace_distance } else { c.delta };
                    vec![c.n_shots.to_string(), c.strength.to_string(), s.mean.to_string(), s.std.to_string(), c.n_ok.to_string()]
                })
                .collect::<Vec<_>>();
            let log = kind != PlotKind::NoiseSweep;
            write_table(dir, stem, &columns, &rows, side(&columns, x, y, log, log))
        }
        PlotKind::PerState => {
            let columns = cols(&["strength", "n_shots", "state_index", "label", "mean_delta", "std_delta"]);
            let mut rows = Vec::new();
            for c in &result.cells {
                for (j, s) in c.per_state_delta.iter().enumerate() {
                    rows.push(vec![
                        c.strength.to_string(),
                        c.n_shots.to_string(),
                        j.to_string(),
                        result.labels.get(j).cloned().unwrap_or_else(|| j.to_string()),
                        s.mean.to_string(),
                        s.std.to_string(),
                    ]);
                }
            }
            if rows.is_empty() {
                return Err(QmtError::InvalidArgument("no per-state values to plot".into()));
            }
            write_table(dir, stem, &columns, &rows, side(&columns, "strength", "mean_delta", false, false))
        }
        PlotKind::SeesawHistogram => {
            let logs: Vec<f64> = result
                .records
                .iter()
                .filter_map(|r| match &r.outcome {
                    Ok(RepetitionData { seesaw: Some(t), .. }) => t.final_delta(),
                    _ => None,
                })
                .map(|d| d.max(1e-16).log10())
                .collect();
            if logs.is_empty() {
                return Err(QmtError::InvalidArgument("no see-saw traces to plot".into()));
            }
            let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min).floor();
            let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).floor() + 1.0;
            let bins = ((hi - lo) * 4.0).round() as usize;
            let mut counts = vec![0usize; bins];
            for v in &logs {
                let b = (((v - lo) * 4.0).floor() as usize).min(bins - 1);
                counts[b] += 1;
            }
            let columns = cols(&["log10_delta_lo", "log10_delta_hi", "count"]);
            let rows = counts
                .iter()
                .enumerate()
                .map(|(b, n)| {
                    let a = lo + b as f64 / 4.0;
                    vec![a.to_string(), (a + 0.25).to_string(), n.to_string()]
                })
                .collect::<Vec<_>>();
            write_table(dir, stem, &columns, &rows, side(&columns, "log10_delta_lo", "count", false, false))
        }
    }
}

/// Mean wall time per method against dimension, one row per instance class.
pub fn emit_bench_plotdata(table: &BenchTable, dir: &Path) -> Result<Vec<PathBuf>> {
    let columns = cols(&[
        "method",
        "dim",
        "ensemble",
        "shots_per_state",
        "mean_seconds",
        "std_seconds",
        "mean_trace_distance",
        "std_trace_distance",
    ]);
    let rows = table
        .summaries()
        .iter()
        .map(|s| {
            vec![
                s.method.name().to_string(),
                s.dim.to_string(),
                s.ensemble.name().to_string(),
                s.shots_per_state.to_string(),
                s.seconds.mean.to_string(),
                s.seconds.std.to_string(),
                s.trace_distance.mean.to_string(),
                s.trace_distance.std.to_string(),
            ]
        })
        .collect::<Vec<_>>();
    let sidecar = Sidecar {
        kind: "bench",
        data_file: "bench.dat".into(),
        columns: columns.clone(),
        x: "dim",
        y: "mean_seconds",
        log_x: false,
        log_y: true,
    };
    write_table(dir, "bench", &columns, &rows, sidecar)
}
