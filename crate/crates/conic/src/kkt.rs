//! Linear algebra for the scaled KKT system
//!
//! ```text
//! [ 0  Aᵀ  Gᵀ   ] [ux]   [bx]
//! [ A  0   0    ] [uy] = [by]
//! [ G  0  -WᵀW  ] [uz]   [bz]
//! ```
//!
//! solved by eliminating `uz` and factoring `H = Gᵀ(WᵀW)⁻¹G` by Cholesky,
//! with a Schur complement for the equality rows. A pivoted LU of the
//! reduced system is the fallback when `H` is singular.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use crate::cone::{ConeVec, Scaling};
use crate::problem::ConicProblem;

const REFINE_ROUNDS: usize = 6;

pub(crate) fn g_mul(p: &ConicProblem, x: &DVector<f64>) -> ConeVec {
    ConeVec {
        lp: DVector::from_iterator(p.lp_rows.len(), p.lp_rows.iter().map(|r| r.dot(x))),
        psd: p.psd.iter().map(|b| b.apply(x)).collect(),
    }
}

pub(crate) fn gt_mul(p: &ConicProblem, z: &ConeVec) -> DVector<f64> {
    let mut out = DVector::zeros(p.num_vars());
    for (row, zr) in p.lp_rows.iter().zip(z.lp.iter()) {
        for &(j, a) in &row.entries {
            out[j] += a * zr;
        }
    }
    for (block, zb) in p.psd.iter().zip(&z.psd) {
        for (j, g) in &block.terms {
            out[*j] += g.dot(zb);
        }
    }
    out
}

pub(crate) fn a_mul(p: &ConicProblem, x: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(p.eq_rows.len(), p.eq_rows.iter().map(|r| r.dot(x)))
}

pub(crate) fn at_mul(p: &ConicProblem, y: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(p.num_vars());
    for (row, yi) in p.eq_rows.iter().zip(y.iter()) {
        for &(j, a) in &row.entries {
            out[j] += a * yi;
        }
    }
    out
}

fn dense_a(p: &ConicProblem) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(p.eq_rows.len(), p.num_vars());
    for (i, row) in p.eq_rows.iter().enumerate() {
        for &(j, v) in &row.entries {
            a[(i, j)] += v;
        }
    }
    a
}

enum Factor {
    Cholesky {
        h: Cholesky<f64, Dyn>,
        /// `H⁻¹ Aᵀ`
        hinv_at: DMatrix<f64>,
        schur: Option<Cholesky<f64, Dyn>>,
    },
    Lu(LU<f64, Dyn, Dyn>),
}

pub(crate) struct KktSolver<'a> {
    problem: &'a ConicProblem,
    scaling: &'a Scaling,
    a: DMatrix<f64>,
    factor: Factor,
}

impl<'a> KktSolver<'a> {
    /// Factors the reduced system for the given scaling. Returns `None`
    /// when both the Cholesky path and the LU fallback fail.
    pub fn new(problem: &'a ConicProblem, scaling: &'a Scaling) -> Option<Self> {
        let n = problem.num_vars();
        let p = problem.num_eq();
        let mut h = DMatrix::<f64>::zeros(n, n);

        let lp_w = scaling.lp_weights_inv();
        for (row, w) in problem.lp_rows.iter().zip(lp_w.iter()) {
            for &(i, ai) in &row.entries {
                for &(j, aj) in &row.entries {
                    h[(i, j)] += w * ai * aj;
                }
            }
        }
        for (k, block) in problem.psd.iter().enumerate() {
            let q = scaling.q(k);
            let scaled: Vec<DMatrix<f64>> = block.terms.iter().map(|(_, g)| q * g * q).collect();
            for (ti, (i, gi)) in block.terms.iter().enumerate() {
                for (tj, (j, _)) in block.terms.iter().enumerate().skip(ti) {
                    let v = gi.dot(&scaled[tj]);
                    h[(*i, *j)] += v;
                    if ti != tj {
                        h[(*j, *i)] += v;
                    }
                }
            }
        }
        let h = (&h + h.transpose()) * 0.5;
        let a = dense_a(problem);

        if let Some(factor) = Self::cholesky_path(&h, &a) {
            return Some(Self {
                problem,
                scaling,
                a,
                factor,
            });
        }

        let scale = h.diagonal().amax().max(1.0);
        let reg = 1e-13 * scale;
        let mut m = DMatrix::<f64>::zeros(n + p, n + p);
        m.view_mut((0, 0), (n, n)).copy_from(&h);
        for i in 0..n {
            m[(i, i)] += reg;
        }
        m.view_mut((n, 0), (p, n)).copy_from(&a);
        m.view_mut((0, n), (n, p)).copy_from(&a.transpose());
        for i in 0..p {
            m[(n + i, n + i)] -= reg;
        }
        let lu = LU::new(m);
        if !lu.is_invertible() {
            return None;
        }
        Some(Self {
            problem,
            scaling,
            a,
            factor: Factor::Lu(lu),
        })
    }

    fn cholesky_path(h: &DMatrix<f64>, a: &DMatrix<f64>) -> Option<Factor> {
        let hc = Cholesky::new(h.clone())?;
        if a.nrows() == 0 {
            return Some(Factor::Cholesky {
                h: hc,
                hinv_at: DMatrix::zeros(h.nrows(), 0),
                schur: None,
            });
        }
        let hinv_at = hc.solve(&a.transpose());
        let s = a * &hinv_at;
        let s = (&s + s.transpose()) * 0.5;
        let sc = Cholesky::new(s)?;
        Some(Factor::Cholesky {
            h: hc,
            hinv_at,
            schur: Some(sc),
        })
    }

    /// Solves `[H Aᵀ; A 0] [ux; uy] = [rx; ry]`.
    fn solve_reduced(&self, rx: &DVector<f64>, ry: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let n = rx.len();
        match &self.factor {
            Factor::Cholesky { h, hinv_at, schur } => match schur {
                None => (h.solve(rx), DVector::zeros(0)),
                Some(sc) => {
                    let hinv_rx = h.solve(rx);
                    let uy = sc.solve(&(&self.a * &hinv_rx - ry));
                    let ux = hinv_rx - hinv_at * &uy;
                    (ux, uy)
                }
            },
            Factor::Lu(lu) => {
                let mut rhs = DVector::zeros(n + ry.len());
                rhs.rows_mut(0, n).copy_from(rx);
                rhs.rows_mut(n, ry.len()).copy_from(ry);
                let sol = lu.solve(&rhs).unwrap_or_else(|| DVector::from_element(n + ry.len(), f64::NAN));
                (sol.rows(0, n).into_owned(), sol.rows(n, ry.len()).into_owned())
            }
        }
    }

    fn solve_once(
        &self,
        bx: &DVector<f64>,
        by: &DVector<f64>,
        bz: &ConeVec,
    ) -> (DVector<f64>, DVector<f64>, ConeVec) {
        let t = self.scaling.apply_wtw_inv(bz);
        let rx = bx + gt_mul(self.problem, &t);
        let (ux, uy) = self.solve_reduced(&rx, by);
        let mut uz = self.scaling.apply_wtw_inv(&g_mul(self.problem, &ux));
        uz.axpy(-1.0, &t);
        (ux, uy, uz)
    }

    /// Solves the full KKT system, refining iteratively while the residual
    /// keeps shrinking.
    pub fn solve(
        &self,
        bx: &DVector<f64>,
        by: &DVector<f64>,
        bz: &ConeVec,
    ) -> (DVector<f64>, DVector<f64>, ConeVec) {
        let (mut ux, mut uy, mut uz) = self.solve_once(bx, by, bz);
        let rhs_norm = (bx.norm_squared() + by.norm_squared() + bz.dot(bz)).sqrt().max(1e-300);
        let mut last = f64::INFINITY;
        for _ in 0..REFINE_ROUNDS {
            let ex = bx - at_mul(self.problem, &uy) - gt_mul(self.problem, &uz);
            let ey = by - a_mul(self.problem, &ux);
            let mut ez = bz.clone();
            ez.axpy(-1.0, &g_mul(self.problem, &ux));
            ez.axpy(1.0, &self.scaling.apply_wtw(&uz));
            let err = (ex.norm_squared() + ey.norm_squared() + ez.dot(&ez)).sqrt();
            if !err.is_finite() || err <= 1e-15 * rhs_norm || err > 0.5 * last {
                break;
            }
            last = err;
            let (cx, cy, cz) = self.solve_once(&ex, &ey, &ez);
            ux += cx;
            uy += cy;
            uz.axpy(1.0, &cz);
        }
        (ux, uy, uz)
    }
}
