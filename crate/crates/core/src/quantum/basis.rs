//! Orthonormal basis of the real vector space of `d × d` Hermitian matrices.

use nalgebra::DVector;
use num_complex::Complex64;

use super::operator::{CMatrix, HermitianOperator};

/// `I/√d` followed by the generalized Gell-Mann matrices, normalized so that
/// `Re Tr(B_a B_b) = δ_ab`.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<HermitianOperator>,
}

impl HermitianBasis {
    pub fn new(d: usize) -> Self {
        let mut elements = Vec::with_capacity(d * d);
        elements.push(HermitianOperator::identity(d).scale(1.0 / (d as f64).sqrt()));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..d {
            for k in (j + 1)..d {
                let mut sym = CMatrix::zeros(d, d);
                sym[(j, k)] = Complex64::new(r, 0.0);
                sym[(k, j)] = Complex64::new(r, 0.0);
                elements.push(HermitianOperator::new(sym).expect("square"));
                let mut anti = CMatrix::zeros(d, d);
                anti[(j, k)] = Complex64::new(0.0, -r);
                anti[(k, j)] = Complex64::new(0.0, r);
                elements.push(HermitianOperator::new(anti).expect("square"));
            }
        }
        for l in 1..d {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut diag = CMatrix::zeros(d, d);
            for i in 0..l {
                diag[(i, i)] = Complex64::new(norm, 0.0);
            }
            diag[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
            elements.push(HermitianOperator::new(diag).expect("square"));
        }
        Self { dim: d, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of elements, `d²`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    /// Real coordinates `Tr(B_a H)`.
    pub fn coordinates(&self, h: &HermitianOperator) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.elements.iter().map(|b| b.inner(h)))
    }

    pub fn from_coordinates(&self, x: &[f64]) -> HermitianOperator {
        let mut out = HermitianOperator::zeros(self.dim);
        for (b, v) in self.elements.iter().zip(x) {
            if *v != 0.0 {
                out.add_scaled(*v, b);
            }
        }
        out
    }
}
