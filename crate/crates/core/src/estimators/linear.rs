use nalgebra::DMatrix;

use crate::error::{QmtError, Result};
use crate::quantum::{HermitianBasis, HermitianOperator, StateEnsemble, IC_RANK_TOL};
use crate::sampling::FrequencyTable;

/// Solves `Tr(ρ_j Π_k) = f_jk` for each `k` in the least-squares sense.
///
/// No positivity is imposed, so the result need not be a POVM.
pub fn linear_inversion(freqs: &FrequencyTable, states: &StateEnsemble) -> Result<Vec<HermitianOperator>> {
    if freqs.num_states() != states.len() {
        return Err(QmtError::Dimension(format!(
            "{} frequency rows for {} states",
            freqs.num_states(),
            states.len()
        )));
    }
    let basis = HermitianBasis::new(states.dim());
    let n = basis.len();
    let mut a = DMatrix::zeros(states.len(), n);
    for (j, rho) in states.states().iter().enumerate() {
        a.row_mut(j).copy_from(&basis.coordinates(rho.op()).transpose());
    }
    let svd = a.svd(true, true);
    let max = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s >= IC_RANK_TOL * max).count();
    if rank < n {
        return Err(QmtError::NotInformationallyComplete { rank, needed: n });
    }
    let coords = svd
        .solve(freqs.frequencies(), IC_RANK_TOL * max)
        .map_err(|e| QmtError::Solver(e.to_string()))?;
    Ok((0..freqs.num_outcomes())
        .map(|k| basis.from_coordinates(coords.column(k).as_slice()))
        .collect())
}
