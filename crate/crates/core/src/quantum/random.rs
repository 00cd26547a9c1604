//! Random states, ensembles and POVMs from the Ginibre ensemble.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::operator::{CMatrix, HermitianOperator};
use super::povm::Povm;
use super::states::{DensityMatrix, StateEnsemble};
use crate::error::{QmtError, Result};

const MAX_ATTEMPTS: usize = 100;

/// `d × d` matrix of iid standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Hilbert-Schmidt random state `GG†/Tr(GG†)`.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(QmtError::InvalidArgument(format!("dimension must be ≥ 2, got {d}")));
    }
    let g = ginibre(d, rng);
    let a = HermitianOperator::new(&g * g.adjoint())?;
    let tr = a.trace();
    DensityMatrix::new(a.scale(1.0 / tr))
}

/// `n` random states, redrawn as a whole until they are informationally complete.
pub fn random_ic_ensemble<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<StateEnsemble> {
    if n < d * d {
        return Err(QmtError::InvalidArgument(format!(
            "an informationally complete ensemble needs at least {} states, got {n}",
            d * d
        )));
    }
    for _ in 0..MAX_ATTEMPTS {
        let states = (0..n)
            .map(|_| random_density_matrix(d, rng))
            .collect::<Result<Vec<_>>>()?;
        let e = StateEnsemble::new(states)?;
        if e.is_informationally_complete() {
            return Ok(e);
        }
    }
    Err(QmtError::GenerationFailed(MAX_ATTEMPTS))
}

/// Random POVM `Π_k = S^{-1/2} A_k S^{-1/2}` with `A_k = G_k G_k†` and `S = Σ A_k`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Result<Povm> {
    if m < 2 {
        return Err(QmtError::InvalidArgument(format!("a POVM needs ≥ 2 outcomes, got {m}")));
    }
    if d < 2 {
        return Err(QmtError::InvalidArgument(format!("dimension must be ≥ 2, got {d}")));
    }
    for _ in 0..MAX_ATTEMPTS {
        let a: Vec<HermitianOperator> = (0..m)
            .map(|_| {
                let g = ginibre(d, rng);
                HermitianOperator::new(&g * g.adjoint())
            })
            .collect::<Result<_>>()?;
        let mut s = HermitianOperator::zeros(d);
        for ak in &a {
            s.add_scaled(1.0, ak);
        }
        let ev = s.eigenvalues();
        if ev[0] <= 1e-12 * ev[d - 1] {
            continue;
        }
        let s_inv_half = s.map_spectrum(|v| 1.0 / v.sqrt());
        let effects = a
            .iter()
            .map(|ak| HermitianOperator::new(s_inv_half.matrix() * ak.matrix() * s_inv_half.matrix()))
            .collect::<Result<Vec<_>>>()?;
        return Povm::new(effects);
    }
    Err(QmtError::GenerationFailed(MAX_ATTEMPTS))
}
