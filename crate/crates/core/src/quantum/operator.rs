use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QmtError, Result};

/// Dense complex matrix.
pub type CMatrix = DMatrix<Complex64>;

/// A `d × d` complex Hermitian matrix.
///
/// The constructor symmetrizes its input as `(A + A†)/2`, so the stored
/// matrix is Hermitian up to rounding.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexRows", into = "ComplexRows")]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl HermitianOperator {
    /// Symmetrizes `mat`. Fails for empty or non-square input.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(QmtError::Dimension(format!(
                "expected a nonempty square matrix, got {}×{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QmtError::InvalidOperator("non-finite entry".into()));
        }
        let mat = (&mat + mat.adjoint()).scale(0.5);
        Ok(Self { mat })
    }

    pub fn from_real(mat: DMatrix<f64>) -> Result<Self> {
        Self::new(mat.map(|v| Complex64::new(v, 0.0)))
    }

    /// Row-major construction from `(re, im)` pairs.
    pub fn from_rows(rows: &[&[(f64, f64)]]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(QmtError::Dimension("rows must have equal length".into()));
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| {
            let (re, im) = rows[i][j];
            Complex64::new(re, im)
        }))
    }

    pub fn identity(d: usize) -> Self {
        Self {
            mat: CMatrix::identity(d, d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            mat: CMatrix::zeros(d, d),
        }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn projector(psi: &DVector<Complex64>) -> Self {
        Self {
            mat: psi * psi.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Re Tr(self · other)`, the real Hilbert-Schmidt inner product.
    pub fn inner(&self, other: &Self) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> DVector<f64> {
        let mut ev = SymmetricEigen::new(self.mat.clone()).eigenvalues;
        ev.as_mut_slice().sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    /// Applies `f` to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let eig = SymmetricEigen::new(self.mat.clone());
        let vals = eig.eigenvalues.map(|v| Complex64::new(f(v), 0.0));
        let v = &eig.eigenvectors;
        let mat = v * CMatrix::from_diagonal(&vals) * v.adjoint();
        Self {
            mat: (&mat + mat.adjoint()).scale(0.5),
        }
    }

    /// `U · self · U†`
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(QmtError::Dimension("unitary size differs from operator".into()));
        }
        Self::new(u * &self.mat * u.adjoint())
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            mat: self.mat.scale(alpha),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat - &other.mat,
        }
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) {
        self.mat += other.mat.scale(alpha);
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(QmtError::Dimension(format!(
                "operators of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianOperator{}", self.mat)
    }
}

/// Trace distance `½ Σ |λ_i(A − B)|`.
pub fn trace_distance(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    a.check_same_dim(b)?;
    Ok(0.5 * a.sub(b).eigenvalues().iter().map(|v| v.abs()).sum::<f64>())
}

/// JSON form of a complex matrix: rows of `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
#[serde(transparent)]
pub(crate) struct ComplexRows(pub Vec<Vec<[f64; 2]>>);

impl From<HermitianOperator> for ComplexRows {
    fn from(op: HermitianOperator) -> Self {
        let m = op.mat;
        ComplexRows(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

impl TryFrom<ComplexRows> for HermitianOperator {
    type Error = QmtError;

    fn try_from(rows: ComplexRows) -> Result<Self> {
        let d = rows.0.len();
        if rows.0.iter().any(|r| r.len() != d) {
            return Err(QmtError::Dimension("matrix rows must have equal length".into()));
        }
        let m = CMatrix::from_fn(d, d, |i, j| Complex64::new(rows.0[i][j][0], rows.0[i][j][1]));
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if (&m - m.adjoint()).iter().any(|z| z.norm() > 1e-12 * scale) {
            return Err(QmtError::InvalidOperator("matrix is not Hermitian".into()));
        }
        HermitianOperator::new(m)
    }
}
