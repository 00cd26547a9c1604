//! Hermitian operators, states, POVMs and standard constructions.

mod basis;
mod constructions;
mod operator;
mod povm;
mod random;
mod states;

pub use basis::HermitianBasis;
pub use constructions::{
    bloch_operator, born_probabilities, computational_basis_povm, pauli_eigenstate_ensemble,
    pauli_matrices, pure_state, sic_bloch_vectors, sic_povm,
};
pub use operator::{trace_distance, CMatrix, HermitianOperator};
pub use povm::{Povm, COMPLETENESS_TOL, EFFECT_TOL};
pub use random::{ginibre, random_density_matrix, random_ic_ensemble, random_povm};
pub use states::{operator_rank, DensityMatrix, StateEnsemble, IC_RANK_TOL, STATE_TOL};
