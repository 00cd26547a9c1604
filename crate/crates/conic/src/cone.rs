//! Vectors in the product cone and Nesterov-Todd scaling.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, SVD};

use crate::problem::ConicProblem;

/// Element of `R^l × S^{n_1} × ... × S^{n_k}` with the trace inner product.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ConeVec {
    pub lp: DVector<f64>,
    pub psd: Vec<DMatrix<f64>>,
}

impl ConeVec {
    pub fn zeros_like(problem: &ConicProblem) -> Self {
        Self {
            lp: DVector::zeros(problem.num_lp()),
            psd: problem
                .psd
                .iter()
                .map(|b| DMatrix::zeros(b.size, b.size))
                .collect(),
        }
    }

    /// The cone identity `e`.
    pub fn identity_like(problem: &ConicProblem) -> Self {
        Self {
            lp: DVector::from_element(problem.num_lp(), 1.0),
            psd: problem.psd.iter().map(|b| DMatrix::identity(b.size, b.size)).collect(),
        }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        let mut acc = self.lp.dot(&other.lp);
        for (a, b) in self.psd.iter().zip(&other.psd) {
            acc += a.dot(b);
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        self.lp.axpy(alpha, &other.lp, 1.0);
        for (a, b) in self.psd.iter_mut().zip(&other.psd) {
            *a += b * alpha;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.lp *= alpha;
        for a in &mut self.psd {
            *a *= alpha;
        }
    }

    pub fn add_identity(&mut self, alpha: f64) {
        self.lp.add_scalar_mut(alpha);
        for a in &mut self.psd {
            for i in 0..a.nrows() {
                a[(i, i)] += alpha;
            }
        }
    }

    /// Largest absolute entry over the orthant and the largest Frobenius
    /// norm over the PSD blocks. Bounds how far a residual can push any
    /// eigenvalue or row.
    pub fn block_max_norm(&self) -> f64 {
        let mut m = self.lp.amax();
        for a in &self.psd {
            m = m.max(a.norm());
        }
        m
    }

    /// Smallest eigenvalue over all blocks (`+inf` for an empty cone).
    pub fn min_eigenvalue(&self) -> f64 {
        let mut m = self.lp.iter().copied().fold(f64::INFINITY, f64::min);
        for a in &self.psd {
            let e = SymmetricEigen::new(symmetrize(a));
            m = m.min(e.eigenvalues.min());
        }
        m
    }

    pub fn symmetrize_blocks(&mut self) {
        for a in &mut self.psd {
            *a = symmetrize(a);
        }
    }

    /// Strictly inside the cone: positive orthant entries and PSD blocks
    /// that admit a Cholesky factorization.
    pub fn is_interior(&self) -> bool {
        self.lp.iter().all(|v| *v > 0.0)
            && self.psd.iter().all(|a| Cholesky::new(a.clone()).is_some())
    }

    pub fn is_finite(&self) -> bool {
        self.lp.iter().all(|v| v.is_finite()) && self.psd.iter().all(|a| a.iter().all(|v| v.is_finite()))
    }
}

pub(crate) fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Nesterov-Todd scaling `W` with `W z = W^{-T} s = λ`.
///
/// Orthant: `W = diag(sqrt(s/z))`. PSD block: `W(u) = Rᵀ u R` with
/// `Rᵀ z R = R⁻¹ s R⁻ᵀ = diag(λ)`.
#[derive(Debug, Clone)]
pub(crate) struct Scaling {
    lp_d: DVector<f64>,
    psd_r: Vec<DMatrix<f64>>,
    #[cfg_attr(not(test), allow(dead_code))]
    psd_rinv: Vec<DMatrix<f64>>,
    /// `R⁻ᵀ R⁻¹`, so that `(WᵀW)⁻¹ u = Q u Q`.
    psd_q: Vec<DMatrix<f64>>,
    pub lambda: ConeVec,
}

impl Scaling {
    /// Computes the scaling for interior points `s`, `z`; `None` when a
    /// Cholesky factorization breaks down.
    pub fn new(s: &ConeVec, z: &ConeVec) -> Option<Self> {
        let lp_d = s.lp.zip_map(&z.lp, |si, zi| (si / zi).sqrt());
        let lp_lambda = s.lp.zip_map(&z.lp, |si, zi| (si * zi).sqrt());
        if lp_d.iter().chain(lp_lambda.iter()).any(|v| !v.is_finite() || *v <= 0.0) {
            return None;
        }
        let mut psd_r = Vec::with_capacity(s.psd.len());
        let mut psd_rinv = Vec::with_capacity(s.psd.len());
        let mut psd_q = Vec::with_capacity(s.psd.len());
        let mut psd_lambda = Vec::with_capacity(s.psd.len());
        for (sb, zb) in s.psd.iter().zip(&z.psd) {
            let ls = Cholesky::new(symmetrize(sb))?.unpack();
            let lz = Cholesky::new(symmetrize(zb))?.unpack();
            let svd = SVD::new(lz.transpose() * &ls, true, true);
            let u = svd.u?;
            let v_t = svd.v_t?;
            let sv = svd.singular_values;
            if sv.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                return None;
            }
            let inv_sqrt = sv.map(|v| 1.0 / v.sqrt());
            // R = Ls V Σ^{-1/2}
            let mut r = ls * v_t.transpose();
            for (j, f) in inv_sqrt.iter().enumerate() {
                r.column_mut(j).scale_mut(*f);
            }
            // R^{-1} = Σ^{-1/2} Uᵀ Lzᵀ
            let mut rinv = u.transpose() * lz.transpose();
            for (i, f) in inv_sqrt.iter().enumerate() {
                rinv.row_mut(i).scale_mut(*f);
            }
            let q = rinv.transpose() * &rinv;
            psd_r.push(r);
            psd_rinv.push(rinv);
            psd_q.push(symmetrize(&q));
            psd_lambda.push(DMatrix::from_diagonal(&sv));
        }
        Some(Self {
            lp_d,
            psd_r,
            psd_rinv,
            psd_q,
            lambda: ConeVec {
                lp: lp_lambda,
                psd: psd_lambda,
            },
        })
    }

    /// The identity scaling used for initialization.
    pub fn identity(problem: &ConicProblem) -> Self {
        let id = ConeVec::identity_like(problem);
        Self {
            lp_d: DVector::from_element(problem.num_lp(), 1.0),
            psd_r: id.psd.clone(),
            psd_rinv: id.psd.clone(),
            psd_q: id.psd.clone(),
            lambda: id,
        }
    }

    pub fn lp_weights_inv(&self) -> DVector<f64> {
        self.lp_d.map(|d| 1.0 / (d * d))
    }

    pub fn q(&self, block: usize) -> &DMatrix<f64> {
        &self.psd_q[block]
    }

    /// `W u`
    pub fn apply_w(&self, u: &ConeVec) -> ConeVec {
        ConeVec {
            lp: u.lp.component_mul(&self.lp_d),
            psd: u
                .psd
                .iter()
                .zip(&self.psd_r)
                .map(|(ub, r)| symmetrize(&(r.transpose() * ub * r)))
                .collect(),
        }
    }

    /// `Wᵀ u`
    pub fn apply_wt(&self, u: &ConeVec) -> ConeVec {
        ConeVec {
            lp: u.lp.component_mul(&self.lp_d),
            psd: u
                .psd
                .iter()
                .zip(&self.psd_r)
                .map(|(ub, r)| symmetrize(&(r * ub * r.transpose())))
                .collect(),
        }
    }

    /// `W⁻ᵀ u`
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn apply_winv_t(&self, u: &ConeVec) -> ConeVec {
        ConeVec {
            lp: u.lp.component_div(&self.lp_d),
            psd: u
                .psd
                .iter()
                .zip(&self.psd_rinv)
                .map(|(ub, ri)| symmetrize(&(ri * ub * ri.transpose())))
                .collect(),
        }
    }

    /// `WᵀW u`
    pub fn apply_wtw(&self, u: &ConeVec) -> ConeVec {
        self.apply_wt(&self.apply_w(u))
    }

    /// `(WᵀW)⁻¹ u`
    pub fn apply_wtw_inv(&self, u: &ConeVec) -> ConeVec {
        ConeVec {
            lp: u.lp.component_div(&self.lp_d).component_div(&self.lp_d),
            psd: u
                .psd
                .iter()
                .zip(&self.psd_q)
                .map(|(ub, q)| symmetrize(&(q * ub * q)))
                .collect(),
        }
    }
}

/// Jordan product `u ∘ v`.
pub(crate) fn jordan_product(u: &ConeVec, v: &ConeVec) -> ConeVec {
    ConeVec {
        lp: u.lp.component_mul(&v.lp),
        psd: u
            .psd
            .iter()
            .zip(&v.psd)
            .map(|(a, b)| (a * b + b * a) * 0.5)
            .collect(),
    }
}

/// Solves `λ ∘ x = w` for `x`, where every PSD block of `λ` is diagonal.
pub(crate) fn jordan_div(lambda: &ConeVec, w: &ConeVec) -> ConeVec {
    ConeVec {
        lp: w.lp.component_div(&lambda.lp),
        psd: lambda
            .psd
            .iter()
            .zip(&w.psd)
            .map(|(l, wb)| {
                let n = l.nrows();
                DMatrix::from_fn(n, n, |i, j| 2.0 * wb[(i, j)] / (l[(i, i)] + l[(j, j)]))
            })
            .collect(),
    }
}

/// Largest `α` with `λ + α Δ` in the cone (`+inf` if unbounded). `λ` must
/// be the diagonal scaled point.
pub(crate) fn max_step(lambda: &ConeVec, delta: &ConeVec) -> f64 {
    let mut alpha = f64::INFINITY;
    for (l, d) in lambda.lp.iter().zip(delta.lp.iter()) {
        if *d < 0.0 {
            alpha = alpha.min(-l / d);
        }
    }
    for (l, d) in lambda.psd.iter().zip(&delta.psd) {
        let n = l.nrows();
        let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / l[(i, i)].sqrt()).collect();
        let m = DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * d[(i, j)] * inv_sqrt[j]);
        let min_eig = SymmetricEigen::new(symmetrize(&m)).eigenvalues.min();
        if min_eig < 0.0 {
            alpha = alpha.min(-1.0 / min_eig);
        }
    }
    alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn single_block(m: DMatrix<f64>) -> ConeVec {
        ConeVec {
            lp: DVector::zeros(0),
            psd: vec![m],
        }
    }

    #[test]
    fn nt_scaling_maps_s_and_z_to_lambda() {
        let s = single_block(dmatrix![2.0, 0.5, 0.1; 0.5, 1.0, 0.2; 0.1, 0.2, 3.0]);
        let z = single_block(dmatrix![1.0, -0.3, 0.0; -0.3, 4.0, 0.4; 0.0, 0.4, 0.5]);
        let w = Scaling::new(&s, &z).unwrap();
        let wz = w.apply_w(&z);
        let ws = w.apply_winv_t(&s);
        assert!((&wz.psd[0] - &w.lambda.psd[0]).amax() < 1e-12);
        assert!((&ws.psd[0] - &w.lambda.psd[0]).amax() < 1e-12);
        // (WᵀW)⁻¹ WᵀW is the identity.
        let u = single_block(dmatrix![0.3, 1.0, -2.0; 1.0, 0.0, 0.5; -2.0, 0.5, 1.0]);
        let back = w.apply_wtw_inv(&w.apply_wtw(&u));
        assert!((&back.psd[0] - &u.psd[0]).amax() < 1e-10);
    }

    #[test]
    fn jordan_div_inverts_product() {
        let lambda = single_block(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 0.5])));
        let x = single_block(dmatrix![0.3, 1.0, -2.0; 1.0, 0.0, 0.5; -2.0, 0.5, 1.0]);
        let w = jordan_product(&lambda, &x);
        let back = jordan_div(&lambda, &w);
        assert!((&back.psd[0] - &x.psd[0]).amax() < 1e-12);
    }

    #[test]
    fn max_step_hits_boundary() {
        let lambda = ConeVec {
            lp: DVector::from_vec(vec![1.0, 2.0]),
            psd: vec![DMatrix::identity(2, 2)],
        };
        let delta = ConeVec {
            lp: DVector::from_vec(vec![-0.5, 1.0]),
            psd: vec![dmatrix![-4.0, 0.0; 0.0, 1.0]],
        };
        assert!((max_step(&lambda, &delta) - 0.25).abs() < 1e-14);
    }
}
