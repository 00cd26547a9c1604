//! Self-consistent tomography by alternating measurement-side and
//! state-side fits.

use std::io::Write;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{QmtError, Result};
use crate::estimators::{fit_single_delta, fit_states_qst, FitOptions};
use crate::quantum::{Povm, StateEnsemble};
use crate::sampling::FrequencyTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    /// Fit the POVM with the states fixed.
    Qmt,
    /// Fit the states with the POVM fixed.
    Qst,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Qmt => "QMT",
            Side::Qst => "QST",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeesawStep {
    pub index: usize,
    pub side: Side,
    pub delta: f64,
    #[serde(with = "crate::serde_util::seconds")]
    pub solve_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeesawOptions {
    /// Stop once consecutive deltas differ by less than this.
    pub nu_delta: f64,
    pub max_steps: usize,
    pub fit: FitOptions,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            nu_delta: 1e-7,
            max_steps: 200,
            fit: FitOptions::default(),
        }
    }
}

/// History of a see-saw run.
///
/// `final_povm` comes from the most recent measurement-side step and
/// `final_states` from the most recent state-side step (the initial guess
/// if none ran). `final_states_step` and `final_povm_step` record which
/// steps produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeesawTrace {
    pub steps: Vec<SeesawStep>,
    pub final_states: StateEnsemble,
    pub final_states_step: Option<usize>,
    pub final_povm: Option<Povm>,
    pub final_povm_step: Option<usize>,
    pub converged: bool,
    pub nu_delta: f64,
    /// Why the run stopped early, if a fit failed.
    pub failure: Option<String>,
}

impl SeesawTrace {
    pub fn deltas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.delta).collect()
    }

    pub fn final_delta(&self) -> Option<f64> {
        self.steps.last().map(|s| s.delta)
    }

    /// Writes `step,side,delta` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "side", "delta"])?;
        for s in &self.steps {
            w.write_record([s.index.to_string(), s.side.name().to_string(), s.delta.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Alternates a single-delta POVM fit and a state fit, starting from the
/// measurement side, until `|δ⁽ˢ⁾ − δ⁽ˢ⁻¹⁾| < ν` or `max_steps` steps ran.
///
/// A failing fit ends the run with `converged = false`; the steps completed
/// so far are kept.
pub fn run_seesaw(
    freqs: &FrequencyTable,
    initial_states: &StateEnsemble,
    opts: &SeesawOptions,
) -> Result<SeesawTrace> {
    if opts.max_steps == 0 {
        return Err(QmtError::InvalidArgument("max_steps must be positive".into()));
    }
    if freqs.num_states() != initial_states.len() {
        return Err(QmtError::Dimension(format!(
            "{} frequency rows for {} states",
            freqs.num_states(),
            initial_states.len()
        )));
    }
    let initial_states = initial_states.clone().require_ic()?;
    let mut trace = SeesawTrace {
        steps: Vec::new(),
        final_states: initial_states,
        final_states_step: None,
        final_povm: None,
        final_povm_step: None,
        converged: false,
        nu_delta: opts.nu_delta,
        failure: None,
    };
    for index in 0..opts.max_steps {
        let side = if index % 2 == 0 { Side::Qmt } else { Side::Qst };
        let fit = match side {
            Side::Qmt => fit_single_delta(freqs, &trace.final_states, &opts.fit),
            Side::Qst => fit_states_qst(freqs, trace.final_povm.as_ref().expect("QMT ran first"), &opts.fit),
        };
        let report = match fit {
            Ok(r) => r,
            Err(e) => {
                trace.failure = Some(format!("step {index} ({}): {e}", side.name()));
                return Ok(trace);
            }
        };
        let delta = report.delta_star.expect("single-delta fits report delta");
        match side {
            Side::Qmt => {
                trace.final_povm = report.fitted_povm;
                trace.final_povm_step = Some(index);
            }
            Side::Qst => {
                let states = report.fitted_states.expect("state fit returns states");
                trace.final_states = trace.final_states.with_states(states.states().to_vec())?;
                trace.final_states_step = Some(index);
            }
        }
        let previous = trace.final_delta();
        trace.steps.push(SeesawStep {
            index,
            side,
            delta,
            solve_time: report.solve_time,
        });
        if let Some(prev) = previous {
            if (delta - prev).abs() < opts.nu_delta {
                trace.converged = true;
                break;
            }
        }
    }
    Ok(trace)
}

/// Summary of a see-saw trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeesawSummary {
    pub deltas: Vec<f64>,
    pub total_steps: usize,
    pub initial_delta: f64,
    pub final_delta: f64,
    /// `δ⁽⁰⁾ / δ⁽ᶠⁱⁿᵃˡ⁾`; infinite when the final delta is zero.
    pub improvement: f64,
    pub converged: bool,
}

pub fn seesaw_report(trace: &SeesawTrace) -> Result<SeesawSummary> {
    let (Some(first), Some(last)) = (trace.steps.first(), trace.steps.last()) else {
        return Err(QmtError::InvalidArgument("see-saw trace has no steps".into()));
    };
    let improvement = if last.delta > 0.0 {
        first.delta / last.delta
    } else {
        f64::INFINITY
    };
    Ok(SeesawSummary {
        deltas: trace.deltas(),
        total_steps: trace.steps.len(),
        initial_delta: first.delta,
        final_delta: last.delta,
        improvement,
        converged: trace.converged,
    })
}
