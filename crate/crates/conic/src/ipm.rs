//! Predictor-corrector interior-point method on the homogeneous self-dual
//! embedding
//!
//! ```text
//! Aᵀy + Gᵀz + cτ = 0
//! Ax − bτ        = 0
//! Gx + s − hτ    = 0
//! κ + cᵀx + bᵀy + hᵀz = 0,     (s, z) ∈ K × K,  τ, κ ≥ 0.
//! ```
//!
//! Each iteration computes the Nesterov-Todd scaling from scratch, factors
//! the reduced KKT matrix once and reuses it for the affine and the
//! combined direction.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::cone::{jordan_div, jordan_product, max_step, ConeVec, Scaling};
use crate::kkt::{a_mul, at_mul, g_mul, gt_mul, KktSolver};
use crate::problem::ConicProblem;

/// Solver tolerances and limits.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub max_iter: usize,
    /// Absolute bound on primal residuals (max entry over the orthant,
    /// Frobenius norm per PSD block, max entry over equalities) and
    /// relative bound on the dual residual.
    pub feas_tol: f64,
    /// Absolute duality gap tolerance.
    pub abs_tol: f64,
    /// Relative duality gap tolerance.
    pub rel_tol: f64,
    /// Fraction of the distance to the boundary taken per step.
    pub step_fraction: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            max_iter: 100,
            feas_tol: 1e-8,
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            step_fraction: 0.99,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    /// Primal feasible within `feas_tol`, gap or dual residual only within
    /// `1e3` times the tolerance.
    NearOptimal,
    /// `y`, `z` hold a certificate: `Aᵀy + Gᵀz = 0`, `bᵀy + hᵀz = −1`.
    PrimalInfeasible,
    /// `x`, `s` hold a certificate: `Ax = 0`, `Gx + s = 0`, `cᵀx = −1`.
    DualInfeasible,
    MaxIterations,
    NumericalError,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: Status,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub s_lp: DVector<f64>,
    pub z_lp: DVector<f64>,
    pub s_psd: Vec<DMatrix<f64>>,
    pub z_psd: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub solve_time: Duration,
}

struct Iterate {
    x: DVector<f64>,
    y: DVector<f64>,
    s: ConeVec,
    z: ConeVec,
    tau: f64,
    kappa: f64,
}

#[derive(Clone, Copy)]
struct Metrics {
    pres: f64,
    dres: f64,
    gap: f64,
    relgap: f64,
    pcost: f64,
    dcost: f64,
}

struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    ds: ConeVec,
    dzc: ConeVec,
    dtau: f64,
    dkappa: f64,
    ds_scaled: ConeVec,
    dz_scaled: ConeVec,
}

fn cone_h(problem: &ConicProblem) -> ConeVec {
    ConeVec {
        lp: DVector::from_vec(problem.lp_rhs.clone()),
        psd: problem.psd.iter().map(|b| b.constant.clone()).collect(),
    }
}

/// Shifts `v` into the interior of the cone when it is not safely inside.
fn push_interior(v: &mut ConeVec) {
    let m = v.min_eigenvalue();
    if !m.is_finite() {
        return;
    }
    if m <= 1e-8 * v.norm().max(1.0) {
        v.add_identity(1.0 - m);
    }
}

/// Solves the cone program. Never panics on numerical trouble; the
/// returned [`Status`] says how far the solve got.
pub fn solve(problem: &ConicProblem, settings: &Settings) -> Solution {
    let start = Instant::now();
    let n = problem.num_vars();
    let p = problem.num_eq();
    let nu = problem.degree() as f64;
    let c = problem.c.clone();
    let b = DVector::from_vec(problem.eq_rhs.clone());
    let h = cone_h(problem);

    let resx0 = c.norm().max(1.0);
    let resy0 = b.norm().max(1.0);
    let resz0 = h.norm().max(1.0);

    let identity = Scaling::identity(problem);
    let Some(kkt0) = KktSolver::new(problem, &identity) else {
        return failure(problem, Status::NumericalError, start, 0);
    };
    let (x, _, mut s) = kkt0.solve(&DVector::zeros(n), &b, &h);
    s.scale(-1.0);
    let (_, y, mut z) = kkt0.solve(&(-&c), &DVector::zeros(p), &ConeVec::zeros_like(problem));
    push_interior(&mut s);
    push_interior(&mut z);
    if !s.is_finite() || !z.is_finite() || !x.iter().all(|v| v.is_finite()) {
        return failure(problem, Status::NumericalError, start, 0);
    }

    let mut it = Iterate {
        x,
        y,
        s,
        z,
        tau: 1.0,
        kappa: 1.0,
    };
    let mut best: Option<(f64, Iterate, Metrics)> = None;
    let status;
    let mut iterations = 0;

    loop {
        let rx = at_mul(problem, &it.y) + gt_mul(problem, &it.z) + &c * it.tau;
        let ry = a_mul(problem, &it.x) - &b * it.tau;
        let gx = g_mul(problem, &it.x);
        let mut rz = gx.clone();
        rz.axpy(1.0, &it.s);
        rz.axpy(-it.tau, &h);
        let cx = c.dot(&it.x);
        let by = b.dot(&it.y);
        let hz = h.dot(&it.z);
        let rt = it.kappa + cx + by + hz;
        let sz = it.s.dot(&it.z);

        let tau = it.tau;
        let pcost = cx / tau;
        let dcost = -(by + hz) / tau;
        let gap = sz / (tau * tau);
        let relgap = if pcost < 0.0 {
            gap / -pcost
        } else if dcost > 0.0 {
            gap / dcost
        } else {
            f64::INFINITY
        };
        let metrics = Metrics {
            pres: ry.amax().max(rz.block_max_norm()) / tau,
            dres: rx.norm() / tau / resx0,
            gap,
            relgap,
            pcost,
            dcost,
        };
        let finite = [metrics.pres, metrics.dres, metrics.gap, pcost, dcost]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            status = Status::NumericalError;
            break;
        }

        let merit = (metrics.pres / settings.feas_tol)
            .max(metrics.dres / settings.feas_tol)
            .max((gap / settings.abs_tol).min(relgap / settings.rel_tol));
        if best.as_ref().is_none_or(|(m, _, _)| merit < *m) {
            best = Some((
                merit,
                Iterate {
                    x: it.x.clone(),
                    y: it.y.clone(),
                    s: it.s.clone(),
                    z: it.z.clone(),
                    tau: it.tau,
                    kappa: it.kappa,
                },
                metrics,
            ));
        }

        if metrics.pres <= settings.feas_tol
            && metrics.dres <= settings.feas_tol
            && (gap <= settings.abs_tol || relgap <= settings.rel_tol)
        {
            return finish(&it, metrics, Status::Optimal, start, iterations);
        }

        if by + hz < 0.0 {
            let pinf = (at_mul(problem, &it.y) + gt_mul(problem, &it.z)).norm() / resx0 / -(by + hz);
            if pinf <= settings.feas_tol {
                return certificate(&it, metrics, Status::PrimalInfeasible, -(by + hz), start, iterations);
            }
        }
        if cx < 0.0 {
            let mut gxs = gx.clone();
            gxs.axpy(1.0, &it.s);
            let dinf = (a_mul(problem, &it.x).norm() / resy0).max(gxs.norm() / resz0) / -cx;
            if dinf <= settings.feas_tol {
                return certificate(&it, metrics, Status::DualInfeasible, -cx, start, iterations);
            }
        }

        if iterations >= settings.max_iter {
            status = Status::MaxIterations;
            break;
        }
        iterations += 1;

        let Some(scaling) = Scaling::new(&it.s, &it.z) else {
            status = Status::NumericalError;
            break;
        };
        let Some(kkt) = KktSolver::new(problem, &scaling) else {
            status = Status::NumericalError;
            break;
        };
        let (x1, y1, z1) = kkt.solve(&(-&c), &b, &h);
        let denom = c.dot(&x1) + b.dot(&y1) + h.dot(&z1) - it.kappa / it.tau;
        let mu = (sz + it.tau * it.kappa) / (nu + 1.0);
        let lambda = &scaling.lambda;
        let lambda_sq = jordan_product(lambda, lambda);

        let newton = |sigma: f64, w: &ConeVec, dtk: f64| -> Direction {
            let eta = 1.0 - sigma;
            let d_s = jordan_div(lambda, w);
            let mut bz = rz.clone();
            bz.scale(-eta);
            bz.axpy(-1.0, &scaling.apply_wt(&d_s));
            let (x2, y2, z2) = kkt.solve(&(&rx * -eta), &(&ry * -eta), &bz);
            let dtau =
                (-eta * rt - dtk / it.tau - c.dot(&x2) - b.dot(&y2) - h.dot(&z2)) / denom;
            let dx = x2 + &x1 * dtau;
            let dy = y2 + &y1 * dtau;
            let mut dzc = z2;
            dzc.axpy(dtau, &z1);
            let dkappa = (dtk - it.kappa * dtau) / it.tau;
            let dz_scaled = scaling.apply_w(&dzc);
            let mut ds_scaled = d_s;
            ds_scaled.axpy(-1.0, &dz_scaled);
            let ds = scaling.apply_wt(&ds_scaled);
            Direction {
                dx,
                dy,
                ds,
                dzc,
                dtau,
                dkappa,
                ds_scaled,
                dz_scaled,
            }
        };

        let step_length = |d: &Direction| -> f64 {
            let mut a = max_step(lambda, &d.ds_scaled).min(max_step(lambda, &d.dz_scaled));
            if d.dtau < 0.0 {
                a = a.min(-it.tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                a = a.min(-it.kappa / d.dkappa);
            }
            a
        };

        let mut w_aff = lambda_sq.clone();
        w_aff.scale(-1.0);
        let aff = newton(0.0, &w_aff, -it.tau * it.kappa);
        let alpha_aff = step_length(&aff).min(1.0);
        let sigma = (1.0 - alpha_aff).max(0.0).powi(3);

        let mut w = lambda_sq;
        w.scale(-1.0);
        w.axpy(-1.0, &jordan_product(&aff.ds_scaled, &aff.dz_scaled));
        w.add_identity(sigma * mu);
        let dtk = -it.tau * it.kappa - aff.dtau * aff.dkappa + sigma * mu;
        let dir = newton(sigma, &w, dtk);
        let mut alpha = (settings.step_fraction * step_length(&dir)).min(1.0);
        // The step is cut in the scaled space; mapping it back can lose the
        // last digits of a nearly singular block, so shorten it until both
        // iterates factor.
        let mut next = None;
        while alpha.is_finite() && alpha > 1e-12 {
            let mut s = it.s.clone();
            let mut z = it.z.clone();
            s.axpy(alpha, &dir.ds);
            z.axpy(alpha, &dir.dzc);
            s.symmetrize_blocks();
            z.symmetrize_blocks();
            if s.is_interior() && z.is_interior() {
                next = Some((s, z));
                break;
            }
            alpha *= 0.8;
        }
        let Some((s, z)) = next else {
            status = Status::NumericalError;
            break;
        };

        it.x.axpy(alpha, &dir.dx, 1.0);
        it.y.axpy(alpha, &dir.dy, 1.0);
        it.s = s;
        it.z = z;
        it.tau += alpha * dir.dtau;
        it.kappa += alpha * dir.dkappa;
    }

    match best {
        Some((_, b_it, m)) => {
            let near = m.pres <= settings.feas_tol
                && m.dres <= 1e3 * settings.feas_tol
                && (m.gap <= 1e3 * settings.abs_tol || m.relgap <= 1e3 * settings.rel_tol);
            let st = if near { Status::NearOptimal } else { status };
            finish(&b_it, m, st, start, iterations)
        }
        None => failure(problem, status, start, iterations),
    }
}

fn finish(
    it: &Iterate,
    m: Metrics,
    status: Status,
    start: Instant,
    iterations: usize,
) -> Solution {
    let inv = 1.0 / it.tau;
    Solution {
        status,
        x: &it.x * inv,
        y: &it.y * inv,
        s_lp: &it.s.lp * inv,
        z_lp: &it.z.lp * inv,
        s_psd: it.s.psd.iter().map(|a| a * inv).collect(),
        z_psd: it.z.psd.iter().map(|a| a * inv).collect(),
        primal_objective: m.pcost,
        dual_objective: m.dcost,
        iterations,
        primal_residual: m.pres,
        dual_residual: m.dres,
        gap: m.gap,
        solve_time: start.elapsed(),
    }
}

fn certificate(
    it: &Iterate,
    m: Metrics,
    status: Status,
    normalizer: f64,
    start: Instant,
    iterations: usize,
) -> Solution {
    let inv = 1.0 / normalizer;
    Solution {
        status,
        x: &it.x * inv,
        y: &it.y * inv,
        s_lp: &it.s.lp * inv,
        z_lp: &it.z.lp * inv,
        s_psd: it.s.psd.iter().map(|a| a * inv).collect(),
        z_psd: it.z.psd.iter().map(|a| a * inv).collect(),
        primal_objective: if status == Status::PrimalInfeasible { f64::INFINITY } else { f64::NEG_INFINITY },
        dual_objective: if status == Status::PrimalInfeasible { f64::INFINITY } else { f64::NEG_INFINITY },
        iterations,
        primal_residual: m.pres,
        dual_residual: m.dres,
        gap: m.gap,
        solve_time: start.elapsed(),
    }
}

fn failure(problem: &ConicProblem, status: Status, start: Instant, iterations: usize) -> Solution {
    let zero = ConeVec::zeros_like(problem);
    Solution {
        status,
        x: DVector::from_element(problem.num_vars(), f64::NAN),
        y: DVector::from_element(problem.num_eq(), f64::NAN),
        s_lp: zero.lp.clone(),
        z_lp: zero.lp,
        s_psd: zero.psd.clone(),
        z_psd: zero.psd,
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        iterations,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        gap: f64::NAN,
        solve_time: start.elapsed(),
    }
}
