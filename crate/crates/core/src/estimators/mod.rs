//! Fitting POVMs (and states) to frequency tables.
//!
//! All estimators take frequencies `f_jk` for input state `j` and outcome
//! `k`. The SDP estimators minimize a norm of the perturbation needed to
//! make the table a set of Born probabilities; least squares and the
//! log-likelihood are the classical baselines.

use std::time::Duration;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::conic::{SolveOptions, SolveStatus};
use crate::error::{QmtError, Result};
use crate::quantum::{HermitianOperator, Povm, StateEnsemble};
use crate::sampling::FrequencyTable;

mod linear;
mod mle;
mod sdp;

pub use linear::linear_inversion;
pub use mle::{fit_log_mle, negative_log_likelihood, project_onto_povms, MleOptions};
pub use sdp::{fit_least_squares, fit_many_deltas, fit_single_delta, fit_states_qst};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    LinearInversion,
    LeastSquares,
    LogMle,
    SingleDelta,
    ManyDeltas,
    StateTomography,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LinearInversion => "linear_inversion",
            Method::LeastSquares => "least_squares",
            Method::LogMle => "log_mle",
            Method::SingleDelta => "single_delta",
            Method::ManyDeltas => "many_deltas",
            Method::StateTomography => "state_tomography",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Reject input sets that are not informationally complete.
    pub require_ic: bool,
    pub solver: SolveOptions,
    pub mle: MleOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            require_ic: true,
            solver: SolveOptions::default(),
            mle: MleOptions::default(),
        }
    }
}

/// Output of an estimator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub method: Method,
    pub status: SolveStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_povm: Option<Povm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_states: Option<StateEnsemble>,
    /// Optimal uniform perturbation (single-delta and state tomography).
    pub delta_star: Option<f64>,
    /// Optimal per-entry perturbations (many-deltas).
    #[serde(with = "crate::serde_util::opt_matrix")]
    pub delta_matrix: Option<DMatrix<f64>>,
    /// Row means of `delta_matrix`.
    pub per_state_delta: Option<Vec<f64>>,
    /// Objective value of the estimator's own loss.
    pub objective: Option<f64>,
    /// `f_jk − Tr(ρ_j Π_k)` at the returned operators.
    #[serde(with = "crate::serde_util::matrix")]
    pub residual_table: DMatrix<f64>,
    pub iterations: usize,
    #[serde(with = "crate::serde_util::seconds")]
    pub solve_time: Duration,
}

impl FitReport {
    /// The fitted POVM; fails for state-side reports.
    pub fn povm(&self) -> Result<&Povm> {
        self.fitted_povm
            .as_ref()
            .ok_or_else(|| QmtError::InvalidArgument("report has no fitted POVM".into()))
    }

    pub fn states(&self) -> Result<&StateEnsemble> {
        self.fitted_states
            .as_ref()
            .ok_or_else(|| QmtError::InvalidArgument("report has no fitted states".into()))
    }

    /// Largest absolute residual.
    pub fn max_abs_residual(&self) -> f64 {
        self.residual_table.amax()
    }
}

/// `f_jk − Tr(ρ_j Π_k)` without clamping.
pub fn residual_table(
    freqs: &FrequencyTable,
    states: &[&HermitianOperator],
    effects: &[&HermitianOperator],
) -> DMatrix<f64> {
    let f = freqs.frequencies();
    DMatrix::from_fn(f.nrows(), f.ncols(), |j, k| f[(j, k)] - states[j].inner(effects[k]))
}

fn check_qmt_inputs(freqs: &FrequencyTable, states: &StateEnsemble, opts: &FitOptions) -> Result<()> {
    if freqs.num_states() != states.len() {
        return Err(QmtError::Dimension(format!(
            "{} frequency rows for {} states",
            freqs.num_states(),
            states.len()
        )));
    }
    if opts.require_ic {
        let rank = states.ic_rank();
        let needed = states.dim() * states.dim();
        if rank < needed {
            return Err(QmtError::NotInformationallyComplete { rank, needed });
        }
    }
    Ok(())
}

/// Validates fitted effects at the solver's feasibility tolerance. The
/// completeness residual is bounded per basis coordinate, so the entrywise
/// bound scales with the dimension.
fn fitted_povm(effects: Vec<HermitianOperator>, feas_tol: f64) -> Result<Povm> {
    let d = effects.first().map_or(1, |e| e.dim()) as f64;
    Povm::with_tolerances(effects, feas_tol, d * feas_tol)
}

/// Runs a POVM estimator by method.
pub fn fit_povm(method: Method, freqs: &FrequencyTable, states: &StateEnsemble, opts: &FitOptions) -> Result<FitReport> {
    match method {
        Method::SingleDelta => fit_single_delta(freqs, states, opts),
        Method::ManyDeltas => fit_many_deltas(freqs, states, opts),
        Method::LeastSquares => fit_least_squares(freqs, states, opts),
        Method::LogMle => fit_log_mle(freqs, states, opts),
        Method::LinearInversion | Method::StateTomography => Err(QmtError::InvalidArgument(format!(
            "{} does not produce a fit report for a POVM",
            method.name()
        ))),
    }
}
