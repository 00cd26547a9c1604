use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::operator::{CMatrix, HermitianOperator};
use super::povm::Povm;
use super::states::{DensityMatrix, StateEnsemble};
use crate::error::{QmtError, Result};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The Pauli matrices `(σ_x, σ_y, σ_z)`.
pub fn pauli_matrices() -> [HermitianOperator; 3] {
    let x = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let y = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let z = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    [x, y, z].map(|m| HermitianOperator::new(m).expect("2x2"))
}

/// `(I + n·σ)/2` scaled by `weight`, for a Bloch vector `n`.
pub fn bloch_operator(n: [f64; 3], weight: f64) -> HermitianOperator {
    let [x, y, z] = pauli_matrices();
    let mut op = HermitianOperator::identity(2);
    op.add_scaled(n[0], &x);
    op.add_scaled(n[1], &y);
    op.add_scaled(n[2], &z);
    op.scale(0.5 * weight)
}

/// Tetrahedral Bloch vectors of the qubit SIC-POVM.
pub fn sic_bloch_vectors() -> [[f64; 3]; 4] {
    let s2 = std::f64::consts::SQRT_2;
    [
        [0.0, 0.0, 1.0],
        [2.0 * s2 / 3.0, 0.0, -1.0 / 3.0],
        [-s2 / 3.0, (2.0f64 / 3.0).sqrt(), -1.0 / 3.0],
        [-s2 / 3.0, -(2.0f64 / 3.0).sqrt(), -1.0 / 3.0],
    ]
}

/// Qubit SIC-POVM with effects `I/4 + n_k·σ/4`.
pub fn sic_povm() -> Povm {
    Povm::new(sic_bloch_vectors().iter().map(|n| bloch_operator(*n, 0.5)).collect())
        .expect("tetrahedral vectors sum to zero")
}

/// Projective measurement in the computational basis of dimension `d`.
pub fn computational_basis_povm(d: usize) -> Povm {
    Povm::new(
        (0..d)
            .map(|i| {
                let mut m = DMatrix::zeros(d, d);
                m[(i, i)] = 1.0;
                HermitianOperator::from_real(m).expect("square")
            })
            .collect(),
    )
    .expect("projectors sum to identity")
}

/// The six Pauli eigenstates labeled `+x, -x, +y, -y, +z, -z`.
pub fn pauli_eigenstate_ensemble() -> StateEnsemble {
    let vectors = [
        ("+x", [1.0, 0.0, 0.0]),
        ("-x", [-1.0, 0.0, 0.0]),
        ("+y", [0.0, 1.0, 0.0]),
        ("-y", [0.0, -1.0, 0.0]),
        ("+z", [0.0, 0.0, 1.0]),
        ("-z", [0.0, 0.0, -1.0]),
    ];
    let states = vectors
        .iter()
        .map(|(_, n)| DensityMatrix::new(bloch_operator(*n, 1.0)).expect("pure state"))
        .collect();
    let labels = vectors.iter().map(|(l, _)| l.to_string()).collect();
    StateEnsemble::with_labels(states, labels).expect("six qubit states")
}

/// Pure state from amplitudes.
pub fn pure_state(amplitudes: &[Complex64]) -> Result<DensityMatrix> {
    DensityMatrix::pure(&DVector::from_column_slice(amplitudes))
}

/// `N × m` matrix of `Tr(ρ_j Π_k)`, clamped to `[0, 1]`.
pub fn born_probabilities(states: &StateEnsemble, povm: &Povm) -> Result<DMatrix<f64>> {
    if states.dim() != povm.dim() {
        return Err(QmtError::Dimension(format!(
            "states have dimension {} but POVM has {}",
            states.dim(),
            povm.dim()
        )));
    }
    Ok(DMatrix::from_fn(states.len(), povm.len(), |j, k| {
        states.states()[j].op().inner(&povm.effects()[k]).clamp(0.0, 1.0)
    }))
}
