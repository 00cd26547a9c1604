use nalgebra::DMatrix;

use super::{check_qmt_inputs, fitted_povm, residual_table, FitOptions, FitReport, Method};
use crate::conic::{LinearExpr, OperatorProgram, PsdVar, ScalarVar, Sense, SolveResult};
use crate::error::{QmtError, Result};
use crate::quantum::{DensityMatrix, HermitianOperator, Povm, StateEnsemble};
use crate::sampling::FrequencyTable;

/// Effect variables `Π_k ⪰ 0` with `Σ Π_k = I`.
fn povm_variables(prog: &mut OperatorProgram, d: usize, m: usize) -> Result<Vec<PsdVar>> {
    let effects: Vec<PsdVar> = (0..m).map(|k| prog.add_psd_var(format!("effect_{k}"), d)).collect();
    prog.constrain_sum(&effects, &HermitianOperator::identity(d))?;
    Ok(effects)
}

/// `f − δ ≤ Tr(ρ Π) ≤ f + δ`
fn bracket(prog: &mut OperatorProgram, x: PsdVar, coeff: &HermitianOperator, f: f64, delta: ScalarVar) -> Result<()> {
    prog.constrain(LinearExpr::trace(x, coeff).plus_scalar(delta, -1.0), Sense::Le, f)?;
    prog.constrain(LinearExpr::trace(x, coeff).plus_scalar(delta, 1.0), Sense::Ge, f)
}

fn solved(prog: &OperatorProgram, opts: &FitOptions) -> Result<SolveResult> {
    prog.solve(&opts.solver)?.require_success()
}

fn qmt_report(
    method: Method,
    freqs: &FrequencyTable,
    states: &StateEnsemble,
    effects: &[PsdVar],
    sol: &SolveResult,
    opts: &FitOptions,
) -> Result<FitReport> {
    let ops: Vec<HermitianOperator> = effects.iter().map(|e| sol.psd(*e).clone()).collect();
    let povm = fitted_povm(ops, opts.solver.feas_tol)?;
    let residual = residual_table(
        freqs,
        &states.states().iter().map(|s| s.op()).collect::<Vec<_>>(),
        &povm.effects().iter().collect::<Vec<_>>(),
    );
    Ok(FitReport {
        method,
        status: sol.status,
        fitted_povm: Some(povm),
        fitted_states: None,
        delta_star: None,
        delta_matrix: None,
        per_state_delta: None,
        objective: None,
        residual_table: residual,
        iterations: sol.stats.iterations,
        solve_time: sol.stats.solve_time,
    })
}

/// Minimizes one uniform perturbation `δ` such that every frequency lies
/// within `δ` of a Born probability of some POVM on the given states.
pub fn fit_single_delta(freqs: &FrequencyTable, states: &StateEnsemble, opts: &FitOptions) -> Result<FitReport> {
    check_qmt_inputs(freqs, states, opts)?;
    let f = freqs.frequencies();
    let mut prog = OperatorProgram::new();
    let effects = povm_variables(&mut prog, states.dim(), freqs.num_outcomes())?;
    let delta = prog.add_scalar_var("delta", Some(0.0));
    for (j, rho) in states.states().iter().enumerate() {
        for (k, e) in effects.iter().enumerate() {
            bracket(&mut prog, *e, rho.op(), f[(j, k)], delta)?;
        }
    }
    prog.minimize(LinearExpr::scalar(delta))?;
    let sol = solved(&prog, opts)?;
    let mut report = qmt_report(Method::SingleDelta, freqs, states, &effects, &sol, opts)?;
    let d = sol.scalar(delta).max(0.0);
    report.delta_star = Some(d);
    report.objective = Some(d);
    Ok(report)
}

/// Minimizes `Σ δ_jk` with one perturbation per table entry.
pub fn fit_many_deltas(freqs: &FrequencyTable, states: &StateEnsemble, opts: &FitOptions) -> Result<FitReport> {
    check_qmt_inputs(freqs, states, opts)?;
    let f = freqs.frequencies();
    let (n, m) = (freqs.num_states(), freqs.num_outcomes());
    let mut prog = OperatorProgram::new();
    let effects = povm_variables(&mut prog, states.dim(), m)?;
    let mut deltas = Vec::with_capacity(n * m);
    let mut objective = LinearExpr::zero();
    for (j, rho) in states.states().iter().enumerate() {
        for (k, e) in effects.iter().enumerate() {
            let djk = prog.add_scalar_var(format!("delta_{j}_{k}"), Some(0.0));
            bracket(&mut prog, *e, rho.op(), f[(j, k)], djk)?;
            objective = objective.plus_scalar(djk, 1.0);
            deltas.push(djk);
        }
    }
    prog.minimize(objective)?;
    let sol = solved(&prog, opts)?;
    let mut report = qmt_report(Method::ManyDeltas, freqs, states, &effects, &sol, opts)?;
    let matrix = DMatrix::from_fn(n, m, |j, k| sol.scalar(deltas[j * m + k]).max(0.0));
    report.per_state_delta = Some(matrix.row_iter().map(|r| r.sum() / m as f64).collect());
    report.objective = Some(matrix.sum());
    report.delta_matrix = Some(matrix);
    Ok(report)
}

/// Minimizes `Σ_jk (f_jk − Tr(ρ_j Π_k))²` over POVMs.
///
/// The residual norm is bounded through the linear matrix inequality
/// `[[t, rᵀ], [r, t·I]] ⪰ 0`, which holds iff `t ≥ ‖r‖₂`.
pub fn fit_least_squares(freqs: &FrequencyTable, states: &StateEnsemble, opts: &FitOptions) -> Result<FitReport> {
    check_qmt_inputs(freqs, states, opts)?;
    let f = freqs.frequencies();
    let mut prog = OperatorProgram::new();
    let effects = povm_variables(&mut prog, states.dim(), freqs.num_outcomes())?;
    let t = prog.add_scalar_var("t", Some(0.0));
    let size = 1 + freqs.num_states() * freqs.num_outcomes();
    let mut lower = Vec::with_capacity(size);
    lower.push(vec![LinearExpr::scalar(t)]);
    for (j, rho) in states.states().iter().enumerate() {
        for (k, e) in effects.iter().enumerate() {
            let r = lower.len();
            let mut row = vec![LinearExpr::zero(); r + 1];
            row[0] = LinearExpr::constant(f[(j, k)]).plus_trace(*e, rho.op(), -1.0);
            row[r] = LinearExpr::scalar(t);
            lower.push(row);
        }
    }
    prog.add_lmi(lower)?;
    prog.minimize(LinearExpr::scalar(t))?;
    let sol = solved(&prog, opts)?;
    let mut report = qmt_report(Method::LeastSquares, freqs, states, &effects, &sol, opts)?;
    report.objective = Some(report.residual_table.iter().map(|r| r * r).sum());
    Ok(report)
}

/// State-side counterpart of the single-delta fit: finds states
/// `ρ_j ⪰ 0, Tr ρ_j = 1` minimizing the uniform perturbation for a fixed POVM.
pub fn fit_states_qst(freqs: &FrequencyTable, povm: &Povm, opts: &FitOptions) -> Result<FitReport> {
    if freqs.num_outcomes() != povm.len() {
        return Err(QmtError::Dimension(format!(
            "{} frequency columns for {} effects",
            freqs.num_outcomes(),
            povm.len()
        )));
    }
    if opts.require_ic && !povm.is_informationally_complete() {
        let needed = povm.dim() * povm.dim();
        let rank = crate::quantum::operator_rank(&povm.effects().iter().collect::<Vec<_>>());
        return Err(QmtError::NotInformationallyComplete { rank, needed });
    }
    let f = freqs.frequencies();
    let d = povm.dim();
    let identity = HermitianOperator::identity(d);
    let mut prog = OperatorProgram::new();
    let delta = prog.add_scalar_var("delta", Some(0.0));
    let mut vars = Vec::with_capacity(freqs.num_states());
    for j in 0..freqs.num_states() {
        let rho = prog.add_psd_var(format!("state_{j}"), d);
        prog.constrain(LinearExpr::trace(rho, &identity), Sense::Eq, 1.0)?;
        for (k, e) in povm.effects().iter().enumerate() {
            bracket(&mut prog, rho, e, f[(j, k)], delta)?;
        }
        vars.push(rho);
    }
    prog.minimize(LinearExpr::scalar(delta))?;
    let sol = solved(&prog, opts)?;
    let states = vars
        .iter()
        .map(|v| DensityMatrix::with_tolerance(sol.psd(*v).clone(), opts.solver.feas_tol))
        .collect::<Result<Vec<_>>>()?;
    let ensemble = StateEnsemble::new(states)?;
    let residual = residual_table(
        freqs,
        &ensemble.states().iter().map(|s| s.op()).collect::<Vec<_>>(),
        &povm.effects().iter().collect::<Vec<_>>(),
    );
    let d_star = sol.scalar(delta).max(0.0);
    Ok(FitReport {
        method: Method::StateTomography,
        status: sol.status,
        fitted_povm: None,
        fitted_states: Some(ensemble),
        delta_star: Some(d_star),
        delta_matrix: None,
        per_state_delta: None,
        objective: Some(d_star),
        residual_table: residual,
        iterations: sol.stats.iterations,
        solve_time: sol.stats.solve_time,
    })
}
