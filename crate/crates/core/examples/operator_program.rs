//! Builds a small semidefinite program by hand: the ground-state energy of a
//! qubit Hamiltonian as a minimization over density matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use sdp_qmt::conic::{LinearExpr, OperatorProgram, Sense, SolveOptions};
use sdp_qmt::quantum::HermitianOperator;

fn main() -> sdp_qmt::Result<()> {
    let c = |re, im| Complex64::new(re, im);
    let h = HermitianOperator::new(DMatrix::from_row_slice(
        2,
        2,
        &[c(1.0, 0.0), c(0.5, -0.5), c(0.5, 0.5), c(-1.0, 0.0)],
    ))?;

    let mut prog = OperatorProgram::new();
    let rho = prog.add_psd_var("rho", 2);
    prog.constrain(LinearExpr::trace(rho, &HermitianOperator::identity(2)), Sense::Eq, 1.0)?;
    prog.minimize(LinearExpr::trace(rho, &h))?;

    println!("{}", prog.debug_dump()?);
    let sol = prog.solve(&SolveOptions::default())?.require_success()?;
    println!("status {:?} after {} iterations", sol.status, sol.stats.iterations);
    println!("min energy {:.10}, exact {:.10}", sol.objective_value, h.min_eigenvalue());
    println!("ground state:\n{}", sol.psd(rho).matrix());
    Ok(())
}
