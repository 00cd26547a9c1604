//! Operator-valued convex programs and their translation to a real
//! symmetric-cone program.
//!
//! Each Hermitian PSD variable `X` of dimension `d` is parametrized by its
//! `d²` real coordinates in an orthonormal Hermitian basis, and the
//! constraint `X ⪰ 0` becomes `[[Re X, −Im X], [Im X, Re X]] ⪰ 0`.

use std::collections::BTreeMap;
use std::time::Duration;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use symcone::{ConicProblem, Settings, SparseRow, Status};

use crate::error::{QmtError, Result};
use crate::quantum::{HermitianBasis, HermitianOperator};

/// Handle to a Hermitian PSD variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PsdVar(usize);

/// Handle to a real scalar variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScalarVar(usize);

/// `Σ c·scalar + Σ c·Tr(F·X) + constant`
#[derive(Debug, Clone, Default)]
pub struct LinearExpr {
    scalars: Vec<(ScalarVar, f64)>,
    traces: Vec<(PsdVar, HermitianOperator)>,
    constant: f64,
}

impl LinearExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(v: ScalarVar) -> Self {
        Self::zero().plus_scalar(v, 1.0)
    }

    /// `Tr(F·X)`
    pub fn trace(x: PsdVar, f: &HermitianOperator) -> Self {
        Self::zero().plus_trace(x, f, 1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::zero().plus_constant(c)
    }

    pub fn plus_scalar(mut self, v: ScalarVar, coeff: f64) -> Self {
        self.scalars.push((v, coeff));
        self
    }

    pub fn plus_trace(mut self, x: PsdVar, f: &HermitianOperator, coeff: f64) -> Self {
        self.traces.push((x, f.scale(coeff)));
        self
    }

    pub fn plus_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    /// Evaluates the expression at given variable values.
    pub fn evaluate(&self, psd: &[HermitianOperator], scalars: &[f64]) -> f64 {
        let mut v = self.constant;
        for (s, c) in &self.scalars {
            v += c * scalars[s.0];
        }
        for (x, f) in &self.traces {
            v += f.inner(&psd[x.0]);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
struct Constraint {
    expr: LinearExpr,
    sense: Sense,
    rhs: f64,
}

/// Symmetric matrix of affine expressions constrained to be PSD.
#[derive(Debug, Clone)]
struct Lmi {
    size: usize,
    /// Lower-triangle entries `(row, col, expr)` with `row ≥ col`.
    entries: Vec<(usize, usize, LinearExpr)>,
}

/// A convex program over Hermitian PSD variables and real scalars with a
/// linear objective to minimize.
#[derive(Debug, Clone, Default)]
pub struct OperatorProgram {
    psd_vars: Vec<(String, usize)>,
    scalar_vars: Vec<(String, Option<f64>)>,
    constraints: Vec<Constraint>,
    lmis: Vec<Lmi>,
    objective: LinearExpr,
}

impl OperatorProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a `dim × dim` Hermitian variable constrained to be PSD.
    pub fn add_psd_var(&mut self, name: impl Into<String>, dim: usize) -> PsdVar {
        self.psd_vars.push((name.into(), dim));
        PsdVar(self.psd_vars.len() - 1)
    }

    /// Adds a scalar variable with an optional lower bound.
    pub fn add_scalar_var(&mut self, name: impl Into<String>, lower: Option<f64>) -> ScalarVar {
        self.scalar_vars.push((name.into(), lower));
        ScalarVar(self.scalar_vars.len() - 1)
    }

    pub fn psd_dim(&self, x: PsdVar) -> usize {
        self.psd_vars[x.0].1
    }

    /// Adds `expr ⋈ rhs`.
    pub fn constrain(&mut self, expr: LinearExpr, sense: Sense, rhs: f64) -> Result<()> {
        self.check_expr(&expr)?;
        self.constraints.push(Constraint { expr, sense, rhs });
        Ok(())
    }

    /// Adds `Σ_i X_i = target` as `d²` real equalities over an orthonormal
    /// Hermitian basis.
    pub fn constrain_sum(&mut self, vars: &[PsdVar], target: &HermitianOperator) -> Result<()> {
        let d = target.dim();
        let basis = HermitianBasis::new(d);
        for b in basis.elements() {
            let mut expr = LinearExpr::zero();
            for &x in vars {
                expr = expr.plus_trace(x, b, 1.0);
            }
            self.constrain(expr, Sense::Eq, b.inner(target))?;
        }
        Ok(())
    }

    /// Adds the constraint that the symmetric matrix with the given lower
    /// triangle (row-major, `entries[r][c]` for `c ≤ r`) is PSD.
    pub fn add_lmi(&mut self, lower: Vec<Vec<LinearExpr>>) -> Result<()> {
        let size = lower.len();
        if size == 0 {
            return Err(QmtError::InvalidArgument("empty LMI".into()));
        }
        let mut entries = Vec::new();
        for (r, row) in lower.into_iter().enumerate() {
            if row.len() != r + 1 {
                return Err(QmtError::Dimension(format!("LMI row {r} must have {} entries", r + 1)));
            }
            for (c, e) in row.into_iter().enumerate() {
                self.check_expr(&e)?;
                entries.push((r, c, e));
            }
        }
        self.lmis.push(Lmi { size, entries });
        Ok(())
    }

    pub fn minimize(&mut self, objective: LinearExpr) -> Result<()> {
        self.check_expr(&objective)?;
        self.objective = objective;
        Ok(())
    }

    fn check_expr(&self, e: &LinearExpr) -> Result<()> {
        for (s, _) in &e.scalars {
            if s.0 >= self.scalar_vars.len() {
                return Err(QmtError::InvalidArgument("unknown scalar variable".into()));
            }
        }
        for (x, f) in &e.traces {
            let Some((_, d)) = self.psd_vars.get(x.0) else {
                return Err(QmtError::InvalidArgument("unknown PSD variable".into()));
            };
            if f.dim() != *d {
                return Err(QmtError::Dimension(format!(
                    "coefficient of dimension {} for variable of dimension {d}",
                    f.dim()
                )));
            }
        }
        Ok(())
    }

    fn layout(&self) -> (Vec<usize>, usize) {
        let mut offsets = Vec::with_capacity(self.psd_vars.len());
        let mut n = 0;
        for (_, d) in &self.psd_vars {
            offsets.push(n);
            n += d * d;
        }
        (offsets, n)
    }

    fn num_coordinates(&self) -> usize {
        self.layout().1 + self.scalar_vars.len()
    }

    /// Coefficients of `expr` on the real coordinate vector.
    fn row(&self, expr: &LinearExpr, offsets: &[usize], scalar_offset: usize, bases: &BTreeMap<usize, HermitianBasis>) -> Vec<(usize, f64)> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (s, c) in &expr.scalars {
            *acc.entry(scalar_offset + s.0).or_default() += c;
        }
        for (x, f) in &expr.traces {
            let basis = &bases[&self.psd_vars[x.0].1];
            for (a, v) in basis.coordinates(f).iter().enumerate() {
                if *v != 0.0 {
                    *acc.entry(offsets[x.0] + a).or_default() += v;
                }
            }
        }
        acc.into_iter().filter(|(_, v)| *v != 0.0).collect()
    }

    /// Lowers the program to the real conic standard form.
    pub fn assemble(&self) -> Result<ConicProblem> {
        let (offsets, scalar_offset) = self.layout();
        let n = self.num_coordinates();
        let bases: BTreeMap<usize, HermitianBasis> = self
            .psd_vars
            .iter()
            .map(|(_, d)| (*d, HermitianBasis::new(*d)))
            .collect();
        let cone_err = |e: symcone::ConeError| QmtError::Solver(e.to_string());

        let mut p = ConicProblem::new(n);
        let mut c = DVector::zeros(n);
        for (j, v) in self.row(&self.objective, &offsets, scalar_offset, &bases) {
            c[j] = v;
        }
        p.set_objective(c).map_err(cone_err)?;

        for con in &self.constraints {
            let entries = self.row(&con.expr, &offsets, scalar_offset, &bases);
            let rhs = con.rhs - con.expr.constant;
            match con.sense {
                Sense::Eq => p.add_eq(SparseRow::new(entries), rhs),
                Sense::Le => p.add_le(SparseRow::new(entries), rhs),
                Sense::Ge => p.add_le(SparseRow::new(entries.into_iter().map(|(j, v)| (j, -v)).collect()), -rhs),
            }
            .map_err(cone_err)?;
        }
        for (i, (_, lb)) in self.scalar_vars.iter().enumerate() {
            if let Some(lb) = lb {
                p.add_le(SparseRow::new(vec![(scalar_offset + i, -1.0)]), -lb).map_err(cone_err)?;
            }
        }
        for (i, (_, d)) in self.psd_vars.iter().enumerate() {
            let terms = bases[d]
                .elements()
                .iter()
                .enumerate()
                .map(|(a, b)| (offsets[i] + a, hermitian_to_real_embedding(b)))
                .collect();
            p.add_lmi(DMatrix::zeros(2 * d, 2 * d), terms).map_err(cone_err)?;
        }
        for lmi in &self.lmis {
            let s = lmi.size;
            let mut constant = DMatrix::zeros(s, s);
            let mut terms: BTreeMap<usize, DMatrix<f64>> = BTreeMap::new();
            for (r, col, e) in &lmi.entries {
                let place = |m: &mut DMatrix<f64>, v: f64| {
                    m[(*r, *col)] += v;
                    if r != col {
                        m[(*col, *r)] += v;
                    }
                };
                place(&mut constant, e.constant);
                for (j, v) in self.row(e, &offsets, scalar_offset, &bases) {
                    place(terms.entry(j).or_insert_with(|| DMatrix::zeros(s, s)), v);
                }
            }
            p.add_lmi(constant, terms.into_iter().collect()).map_err(cone_err)?;
        }
        Ok(p)
    }

    /// The assembled program in the sparse-triplet text format of
    /// [`ConicProblem::to_triplet_string`].
    pub fn debug_dump(&self) -> Result<String> {
        Ok(self.assemble()?.to_triplet_string())
    }

    /// Solves the program and re-verifies the returned point.
    pub fn solve(&self, options: &SolveOptions) -> Result<SolveResult> {
        let problem = self.assemble()?;
        let settings = Settings {
            max_iter: options.max_iter,
            feas_tol: options.feas_tol,
            abs_tol: options.opt_tol,
            rel_tol: options.opt_tol,
            ..Settings::default()
        };
        let sol = symcone::solve(&problem, &settings);
        let mut status = match sol.status {
            Status::Optimal => SolveStatus::Optimal,
            Status::NearOptimal => SolveStatus::NearOptimal,
            Status::PrimalInfeasible => SolveStatus::Infeasible,
            Status::DualInfeasible => SolveStatus::Unbounded,
            Status::MaxIterations | Status::NumericalError => SolveStatus::NumericalFailure,
        };
        let (offsets, scalar_offset) = self.layout();
        let bases: BTreeMap<usize, HermitianBasis> = self
            .psd_vars
            .iter()
            .map(|(_, d)| (*d, HermitianBasis::new(*d)))
            .collect();
        let finite = sol.x.iter().all(|v| v.is_finite());
        let psd_values: Vec<HermitianOperator> = self
            .psd_vars
            .iter()
            .zip(&offsets)
            .map(|((_, d), off)| {
                if finite {
                    bases[d].from_coordinates(&sol.x.as_slice()[*off..off + d * d])
                } else {
                    HermitianOperator::zeros(*d)
                }
            })
            .collect();
        let scalar_values: Vec<f64> = (0..self.scalar_vars.len())
            .map(|i| if finite { sol.x[scalar_offset + i] } else { f64::NAN })
            .collect();

        let max_psd_violation = psd_values
            .iter()
            .map(|x| (-x.min_eigenvalue()).max(0.0))
            .fold(0.0, f64::max);
        let mut max_constraint_violation: f64 = 0.0;
        for con in &self.constraints {
            let lhs = con.expr.evaluate(&psd_values, &scalar_values);
            let v = match con.sense {
                Sense::Eq => (lhs - con.rhs).abs(),
                Sense::Le => (lhs - con.rhs).max(0.0),
                Sense::Ge => (con.rhs - lhs).max(0.0),
            };
            max_constraint_violation = max_constraint_violation.max(v);
        }
        for ((_, lb), v) in self.scalar_vars.iter().zip(&scalar_values) {
            if let Some(lb) = lb {
                max_constraint_violation = max_constraint_violation.max(lb - v);
            }
        }
        if status.is_success()
            && !(max_psd_violation <= options.feas_tol && max_constraint_violation <= options.feas_tol)
        {
            status = SolveStatus::NumericalFailure;
        }
        let objective_value = self.objective.evaluate(&psd_values, &scalar_values);

        let mut var_values = BTreeMap::new();
        for ((name, _), v) in self.psd_vars.iter().zip(&psd_values) {
            var_values.insert(name.clone(), VarValue::Operator(v.clone()));
        }
        for ((name, _), v) in self.scalar_vars.iter().zip(&scalar_values) {
            var_values.insert(name.clone(), VarValue::Scalar(*v));
        }
        Ok(SolveResult {
            status,
            objective_value,
            psd_values,
            scalar_values,
            var_values,
            stats: SolverStats {
                iterations: sol.iterations,
                solve_time: sol.solve_time,
                primal_objective: sol.primal_objective + self.objective.constant,
                dual_objective: sol.dual_objective + self.objective.constant,
                max_psd_violation,
                max_constraint_violation,
            },
        })
    }
}

/// `[[Re H, −Im H], [Im H, Re H]]`
pub fn hermitian_to_real_embedding(h: &HermitianOperator) -> DMatrix<f64> {
    let d = h.dim();
    let m = h.matrix();
    DMatrix::from_fn(2 * d, 2 * d, |r, c| {
        let z = m[(r % d, c % d)];
        match (r < d, c < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            opt_tol: 1e-8,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl SolveStatus {
    /// Optimal or near-optimal.
    pub fn is_success(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VarValue {
    Operator(HermitianOperator),
    Scalar(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    #[serde(with = "crate::serde_util::seconds")]
    pub solve_time: Duration,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Largest negative eigenvalue over the returned PSD variables, recomputed.
    pub max_psd_violation: f64,
    /// Largest constraint residual at the returned point, recomputed.
    pub max_constraint_violation: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Objective evaluated at the returned point.
    pub objective_value: f64,
    psd_values: Vec<HermitianOperator>,
    scalar_values: Vec<f64>,
    pub var_values: BTreeMap<String, VarValue>,
    pub stats: SolverStats,
}

impl SolveResult {
    pub fn psd(&self, x: PsdVar) -> &HermitianOperator {
        &self.psd_values[x.0]
    }

    pub fn scalar(&self, v: ScalarVar) -> f64 {
        self.scalar_values[v.0]
    }

    pub fn value(&self, name: &str) -> Option<&VarValue> {
        self.var_values.get(name)
    }

    /// Fails unless the status is optimal or near-optimal.
    pub fn require_success(self) -> Result<Self> {
        if self.status.is_success() {
            Ok(self)
        } else {
            Err(QmtError::Solver(format!("solver returned {:?}", self.status)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_one_psd_minimum() {
        let mut prog = OperatorProgram::new();
        let x = prog.add_psd_var("X", 2);
        let id = HermitianOperator::identity(2);
        prog.constrain(LinearExpr::trace(x, &id), Sense::Eq, 1.0).unwrap();
        prog.minimize(LinearExpr::trace(x, &id)).unwrap();
        let r = prog.solve(&SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective_value - 1.0).abs() < 1e-8);
    }
}
