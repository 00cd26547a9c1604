//! Maximum-likelihood fit over the POVM set by accelerated projected
//! gradient descent.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_qmt_inputs, fitted_povm, residual_table, FitOptions, FitReport, Method};
use crate::conic::SolveStatus;
use crate::error::{QmtError, Result};
use crate::quantum::{random_povm, CMatrix, HermitianBasis, HermitianOperator, Povm, StateEnsemble};
use crate::sampling::FrequencyTable;

/// Probabilities at or below this floor make the likelihood infinite when
/// the matching frequency is positive.
const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    /// Stationarity tolerance on the norm of the gradient mapping.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of starting points. The first is `Π_k = I/m`; further starts
    /// are random POVMs drawn from `seed`.
    pub starts: usize,
    pub seed: u64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 200_000,
            starts: 1,
            seed: 0,
        }
    }
}

fn inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// `−Σ_jk f_jk log Tr(ρ_j Π_k)`, with `0·log(·) = 0` and `+∞` when a
/// positive frequency meets a vanishing probability.
pub fn negative_log_likelihood(freqs: &FrequencyTable, states: &StateEnsemble, povm: &Povm) -> Result<f64> {
    check_qmt_inputs(freqs, states, &FitOptions { require_ic: false, ..FitOptions::default() })?;
    if povm.len() != freqs.num_outcomes() || povm.dim() != states.dim() {
        return Err(QmtError::Dimension("POVM does not match the frequency table".into()));
    }
    let rhos: Vec<CMatrix> = states.states().iter().map(|s| s.op().matrix().clone()).collect();
    let effects: Vec<CMatrix> = povm.effects().iter().map(|e| e.matrix().clone()).collect();
    Ok(Likelihood { f: freqs.frequencies(), rhos: &rhos }.value(&effects))
}

struct Likelihood<'a> {
    f: &'a DMatrix<f64>,
    rhos: &'a [CMatrix],
}

impl Likelihood<'_> {
    fn value(&self, effects: &[CMatrix]) -> f64 {
        let mut v = 0.0;
        for (j, rho) in self.rhos.iter().enumerate() {
            for (k, e) in effects.iter().enumerate() {
                let f = self.f[(j, k)];
                if f > 0.0 {
                    let p = inner(rho, e);
                    if p <= PROB_FLOOR {
                        return f64::INFINITY;
                    }
                    v -= f * p.ln();
                }
            }
        }
        v
    }

    fn gradient(&self, effects: &[CMatrix]) -> Vec<CMatrix> {
        effects
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let d = e.nrows();
                let mut g = CMatrix::zeros(d, d);
                for (j, rho) in self.rhos.iter().enumerate() {
                    let f = self.f[(j, k)];
                    if f > 0.0 {
                        g -= rho.scale(f / inner(rho, e));
                    }
                }
                g
            })
            .collect()
    }
}

/// Euclidean projection onto `{Π_k ⪰ 0, Σ Π_k = I}`.
///
/// The projection is `Π_k = P₊(X_k + Y)` where the Hermitian multiplier `Y`
/// solves `Σ_k P₊(X_k + Y) = I`; `Y` is found by a semismooth Newton method
/// on the convex dual `ψ(Y) = Σ_k ½‖P₊(X_k + Y)‖² − Tr Y`.
struct Projector {
    basis: HermitianBasis,
    multiplier: CMatrix,
}

struct Split {
    vals: DVector<f64>,
    vecs: CMatrix,
}

impl Split {
    fn new(m: &CMatrix) -> Self {
        let eig = SymmetricEigen::new((m + m.adjoint()).scale(0.5));
        Self {
            vals: eig.eigenvalues,
            vecs: eig.eigenvectors,
        }
    }

    fn positive_part(&self) -> CMatrix {
        let v = &self.vecs;
        let diag = self.vals.map(|l| Complex64::new(l.max(0.0), 0.0));
        v * CMatrix::from_diagonal(&diag) * v.adjoint()
    }

    fn positive_norm_sq(&self) -> f64 {
        self.vals.iter().map(|l| l.max(0.0).powi(2)).sum()
    }

    /// Directional derivative of `P₊` along `h`.
    fn derivative(&self, h: &CMatrix) -> CMatrix {
        let v = &self.vecs;
        let n = self.vals.len();
        let mut w = v.adjoint() * h * v;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (self.vals[i], self.vals[j]);
                let omega = if a > 0.0 && b > 0.0 {
                    1.0
                } else if a <= 0.0 && b <= 0.0 {
                    0.0
                } else {
                    (a.max(0.0) - b.max(0.0)) / (a - b)
                };
                w[(i, j)] *= omega;
            }
        }
        v * w * v.adjoint()
    }
}

impl Projector {
    fn new(d: usize) -> Self {
        Self {
            basis: HermitianBasis::new(d),
            multiplier: CMatrix::zeros(d, d),
        }
    }

    fn dual(&self, x: &[CMatrix], y: &CMatrix) -> (f64, Vec<Split>) {
        let splits: Vec<Split> = x.iter().map(|xk| Split::new(&(xk + y))).collect();
        let tr: f64 = y.diagonal().iter().map(|z| z.re).sum();
        let v = 0.5 * splits.iter().map(Split::positive_norm_sq).sum::<f64>() - tr;
        (v, splits)
    }

    fn project(&mut self, x: &[CMatrix]) -> Vec<CMatrix> {
        let d = self.basis.dim();
        let n = self.basis.len();
        let id = CMatrix::identity(d, d);
        let mut y = self.multiplier.clone();
        let (mut psi, mut splits) = self.dual(x, &y);
        for _ in 0..100 {
            let sum = splits.iter().fold(CMatrix::zeros(d, d), |acc, s| acc + s.positive_part());
            let grad = &sum - &id;
            let gnorm = grad.norm();
            if gnorm <= 1e-13 {
                break;
            }
            let g = DVector::from_iterator(n, self.basis.elements().iter().map(|b| inner(b.matrix(), &grad)));
            let mut hess = DMatrix::zeros(n, n);
            for (a, b) in self.basis.elements().iter().enumerate() {
                let hb = splits
                    .iter()
                    .fold(CMatrix::zeros(d, d), |acc, s| acc + s.derivative(b.matrix()));
                for (c, e) in self.basis.elements().iter().enumerate() {
                    hess[(c, a)] = inner(e.matrix(), &hb);
                }
            }
            let hess = (&hess + hess.transpose()) * 0.5 + DMatrix::identity(n, n) * gnorm.min(1.0);
            let step = match Cholesky::new(hess) {
                Some(c) => -c.solve(&g),
                None => -&g,
            };
            let slope = g.dot(&step);
            let dir = self.basis.from_coordinates(step.as_slice()).into_matrix();
            let mut s = 1.0;
            let mut accepted = false;
            while s > 1e-12 {
                let trial = &y + dir.scale(s);
                let (tpsi, tsplits) = self.dual(x, &trial);
                if tpsi <= psi + 1e-4 * s * slope || (tpsi - psi).abs() <= 1e-15 * psi.abs().max(1.0) {
                    y = trial;
                    psi = tpsi;
                    splits = tsplits;
                    accepted = true;
                    break;
                }
                s *= 0.5;
            }
            if !accepted {
                // ∇ψ is m-Lipschitz, so a 1/m gradient step always decreases ψ.
                y -= grad.scale(1.0 / x.len() as f64);
                let (tpsi, tsplits) = self.dual(x, &y);
                psi = tpsi;
                splits = tsplits;
            }
        }
        self.multiplier = y;
        splits.iter().map(Split::positive_part).collect()
    }
}

/// Projects operators onto the set of POVMs with the same number of outcomes.
pub fn project_onto_povms(x: &[HermitianOperator]) -> Result<Vec<HermitianOperator>> {
    let Some(first) = x.first() else {
        return Err(QmtError::InvalidArgument("nothing to project".into()));
    };
    let mats: Vec<CMatrix> = x.iter().map(|o| o.matrix().clone()).collect();
    Projector::new(first.dim())
        .project(&mats)
        .into_iter()
        .map(HermitianOperator::new)
        .collect()
}

struct MleRun {
    effects: Vec<CMatrix>,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn fista(lik: &Likelihood, start: Vec<CMatrix>, opts: &MleOptions) -> MleRun {
    let d = start[0].nrows();
    let mut proj = Projector::new(d);
    let mut x = start;
    let mut fx = lik.value(&x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut lip = 1.0f64;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut fy = lik.value(&y);
        if !fy.is_finite() {
            y = x.clone();
            fy = fx;
            t = 1.0;
        }
        let g = lik.gradient(&y);
        let (z, fz, gap) = loop {
            let trial: Vec<CMatrix> = y.iter().zip(&g).map(|(yk, gk)| yk - gk.scale(1.0 / lip)).collect();
            let z = proj.project(&trial);
            let fz = lik.value(&z);
            let diff: Vec<CMatrix> = z.iter().zip(&y).map(|(a, b)| a - b).collect();
            let lin: f64 = g.iter().zip(&diff).map(|(a, b)| inner(a, b)).sum();
            let dsq: f64 = diff.iter().map(|m| m.norm_squared()).sum();
            let bound = fy + lin + 0.5 * lip * dsq;
            if fz.is_finite() && (fz <= bound + 1e-15 * fy.abs().max(1.0) || dsq < 1e-30) {
                break (z, fz, lip * dsq.sqrt());
            }
            lip *= 2.0;
            if lip > 1e16 {
                break (x.clone(), fx, 0.0);
            }
        };
        if gap <= opts.tol {
            converged = true;
            if fz <= fx {
                x = z;
                fx = fz;
            }
            break;
        }
        let restart: f64 = y
            .iter()
            .zip(&z)
            .zip(&x)
            .map(|((yk, zk), xk)| inner(&(yk - zk), &(zk - xk)))
            .sum();
        if restart > 0.0 || fz > fx {
            t = 1.0;
            y = z.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            y = z.iter().zip(&x).map(|(zk, xk)| zk + (zk - xk).scale(beta)).collect();
            t = t_next;
        }
        x = z;
        fx = fz;
        lip *= 0.9;
    }
    MleRun {
        effects: x,
        value: fx,
        iterations,
        converged,
    }
}

/// Minimizes the negative log-likelihood over POVMs to first-order
/// stationarity.
pub fn fit_log_mle(freqs: &FrequencyTable, states: &StateEnsemble, opts: &FitOptions) -> Result<FitReport> {
    check_qmt_inputs(freqs, states, opts)?;
    if freqs.frequencies().iter().any(|f| *f < 0.0) {
        return Err(QmtError::InvalidArgument("frequencies must be nonnegative".into()));
    }
    let start_time = Instant::now();
    let d = states.dim();
    let m = freqs.num_outcomes();
    let rhos: Vec<CMatrix> = states.states().iter().map(|s| s.op().matrix().clone()).collect();
    let lik = Likelihood {
        f: freqs.frequencies(),
        rhos: &rhos,
    };
    let mut starts = vec![vec![CMatrix::identity(d, d).scale(1.0 / m as f64); m]];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.mle.seed);
    for _ in 1..opts.mle.starts.max(1) {
        let p = random_povm(d, m, &mut rng)?;
        starts.push(p.effects().iter().map(|e| e.matrix().clone()).collect());
    }
    let mut best: Option<MleRun> = None;
    let mut total_iter = 0;
    for s in starts {
        let run = fista(&lik, s, &opts.mle);
        total_iter += run.iterations;
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    if !best.converged {
        return Err(QmtError::IterationLimit(opts.mle.max_iter));
    }
    let effects = best
        .effects
        .into_iter()
        .map(HermitianOperator::new)
        .collect::<Result<Vec<_>>>()?;
    let povm = fitted_povm(effects, opts.solver.feas_tol)?;
    let residual = residual_table(
        freqs,
        &states.states().iter().map(|s| s.op()).collect::<Vec<_>>(),
        &povm.effects().iter().collect::<Vec<_>>(),
    );
    Ok(FitReport {
        method: Method::LogMle,
        status: SolveStatus::Optimal,
        fitted_povm: Some(povm),
        fitted_states: None,
        delta_star: None,
        delta_matrix: None,
        per_state_delta: None,
        objective: Some(best.value),
        residual_table: residual,
        iterations: total_iter,
        solve_time: start_time.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_of_a_povm_is_itself() {
        let sic = crate::quantum::sic_povm();
        let p = project_onto_povms(sic.effects()).unwrap();
        for (a, b) in p.iter().zip(sic.effects()) {
            assert!(a.max_abs_diff(b) < 1e-12);
        }
    }

    #[test]
    fn projection_lands_in_the_povm_set() {
        let x = vec![
            HermitianOperator::from_rows(&[&[(1.5, 0.0), (0.2, 0.3)], &[(0.2, -0.3), (-0.4, 0.0)]]).unwrap(),
            HermitianOperator::from_rows(&[&[(-0.2, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (0.1, 0.0)]]).unwrap(),
            HermitianOperator::from_rows(&[&[(0.3, 0.0), (-0.5, 0.0)], &[(-0.5, 0.0), (0.9, 0.0)]]).unwrap(),
        ];
        let p = project_onto_povms(&x).unwrap();
        Povm::with_tolerances(p, 1e-12, 1e-11).unwrap();
    }
}
