use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdp_qmt::conic::{hermitian_to_real_embedding, LinearExpr, OperatorProgram, Sense, SolveOptions, SolveStatus, VarValue};
use sdp_qmt::quantum::{pauli_matrices, random_density_matrix, HermitianOperator};

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn diagonal(values: &[f64]) -> HermitianOperator {
    HermitianOperator::from_real(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))).unwrap()
}

#[test]
fn embedding_examples() {
    let [_, sy, _] = pauli_matrices();
    let e = hermitian_to_real_embedding(&sy);
    assert!((&e - e.transpose()).amax() == 0.0);
    let ev = sorted_eigenvalues(e);
    for (a, b) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
    }

    assert_eq!(hermitian_to_real_embedding(&HermitianOperator::identity(3)), DMatrix::identity(6, 6));

    let real = HermitianOperator::from_real(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0])).unwrap();
    let e = hermitian_to_real_embedding(&real);
    assert!(e.view((0, 2), (2, 2)).amax() == 0.0);
    assert!(e.view((2, 0), (2, 2)).amax() == 0.0);
    assert_eq!(e.view((0, 0), (2, 2)), e.view((2, 2), (2, 2)));
}

proptest! {
    #[test]
    fn embedding_doubles_the_spectrum(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_density_matrix(3, &mut rng).unwrap().into_op();
        let b = random_density_matrix(3, &mut rng).unwrap().into_op();
        let h = a.sub(&b.scale(2.0));
        let mut expected: Vec<f64> = h.eigenvalues().iter().flat_map(|l| [*l, *l]).collect();
        expected.sort_by(f64::total_cmp);
        let got = sorted_eigenvalues(hermitian_to_real_embedding(&h));
        for (x, y) in got.iter().zip(&expected) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn nonnegative_scalar_minimum_is_zero() {
    let mut prog = OperatorProgram::new();
    let t = prog.add_scalar_var("t", Some(0.0));
    prog.minimize(LinearExpr::scalar(t)).unwrap();
    let r = prog.solve(&SolveOptions::default()).unwrap();
    assert!(r.status.is_success());
    assert!(r.scalar(t).abs() < 1e-8);
    assert_eq!(r.value("t"), Some(&VarValue::Scalar(r.scalar(t))));
}

#[test]
fn diagonal_cost_matches_linear_program() {
    // Minimizing Tr(C X) over density matrices gives the smallest eigenvalue
    // of C, attained at the matching eigenprojector.
    let costs = [0.7, -0.3, 1.2];
    let mut prog = OperatorProgram::new();
    let x = prog.add_psd_var("X", 3);
    prog.constrain(LinearExpr::trace(x, &HermitianOperator::identity(3)), Sense::Eq, 1.0).unwrap();
    prog.minimize(LinearExpr::trace(x, &diagonal(&costs))).unwrap();
    let r = prog.solve(&SolveOptions::default()).unwrap();
    assert!(r.status.is_success());
    assert_abs_diff_eq!(r.objective_value, -0.3, epsilon = 1e-7);
    assert_abs_diff_eq!(r.psd(x).matrix()[(1, 1)].re, 1.0, epsilon = 1e-6);
}

#[test]
fn complex_cost_reaches_ground_energy() {
    let h = HermitianOperator::new(DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5, 0.0),
            Complex64::new(0.3, -0.4),
            Complex64::new(0.3, 0.4),
            Complex64::new(-0.5, 0.0),
        ],
    ))
    .unwrap();
    let mut prog = OperatorProgram::new();
    let x = prog.add_psd_var("X", 2);
    prog.constrain(LinearExpr::trace(x, &HermitianOperator::identity(2)), Sense::Eq, 1.0).unwrap();
    prog.minimize(LinearExpr::trace(x, &h)).unwrap();
    let r = prog.solve(&SolveOptions::default()).unwrap();
    assert!(r.status.is_success());
    assert_abs_diff_eq!(r.objective_value, h.min_eigenvalue(), epsilon = 1e-7);
}

#[test]
fn lmi_bounds_a_product() {
    // [[a, 1], [1, b]] ⪰ 0 forces ab ≥ 1, so min a + b = 2.
    let mut prog = OperatorProgram::new();
    let a = prog.add_scalar_var("a", None);
    let b = prog.add_scalar_var("b", None);
    prog.add_lmi(vec![
        vec![LinearExpr::scalar(a)],
        vec![LinearExpr::constant(1.0), LinearExpr::scalar(b)],
    ])
    .unwrap();
    prog.minimize(LinearExpr::scalar(a).plus_scalar(b, 1.0)).unwrap();
    let r = prog.solve(&SolveOptions::default()).unwrap();
    assert!(r.status.is_success());
    assert_abs_diff_eq!(r.objective_value, 2.0, epsilon = 1e-7);
    assert_abs_diff_eq!(r.scalar(a), 1.0, epsilon = 1e-5);
}

#[test]
fn primal_and_dual_objectives_agree() {
    let mut prog = OperatorProgram::new();
    let x = prog.add_psd_var("X", 2);
    let y = prog.add_psd_var("Y", 2);
    prog.constrain_sum(&[x, y], &HermitianOperator::identity(2)).unwrap();
    let [sx, _, sz] = pauli_matrices();
    prog.minimize(LinearExpr::trace(x, &sz).plus_trace(y, &sx, 1.0)).unwrap();
    let r = prog.solve(&SolveOptions::default()).unwrap();
    assert!(r.status.is_success());
    let s = &r.stats;
    assert!(s.primal_objective >= s.dual_objective - 1e-7);
    assert!((s.primal_objective - s.dual_objective).abs() < 1e-6);
    assert!(s.max_psd_violation <= 1e-8 && s.max_constraint_violation <= 1e-8);
}

#[test]
fn infeasible_program_is_reported() {
    let mut prog = OperatorProgram::new();
    let x = prog.add_psd_var("X", 2);
    prog.constrain(LinearExpr::trace(x, &HermitianOperator::identity(2)), Sense::Eq, -1.0).unwrap();
    prog.minimize(LinearExpr::zero()).unwrap();
    let r = prog.solve(&SolveOptions::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Infeasible);
    assert!(r.require_success().is_err());
}

#[test]
fn unbounded_program_is_reported() {
    let mut prog = OperatorProgram::new();
    let t = prog.add_scalar_var("t", None);
    prog.constrain(LinearExpr::scalar(t), Sense::Le, 0.0).unwrap();
    prog.minimize(LinearExpr::scalar(t)).unwrap();
    let r = prog.solve(&SolveOptions::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Unbounded);
}

#[test]
fn malformed_programs_are_rejected() {
    let mut prog = OperatorProgram::new();
    let x = prog.add_psd_var("X", 2);
    assert!(prog.constrain(LinearExpr::trace(x, &HermitianOperator::identity(3)), Sense::Eq, 1.0).is_err());
    assert!(prog.add_lmi(vec![]).is_err());
    assert!(prog.add_lmi(vec![vec![LinearExpr::zero(), LinearExpr::zero()]]).is_err());
}

#[test]
fn dump_lists_dimensions_first() {
    let mut prog = OperatorProgram::new();
    let x = prog.add_psd_var("X", 2);
    let t = prog.add_scalar_var("t", Some(0.0));
    prog.constrain(LinearExpr::trace(x, &HermitianOperator::identity(2)), Sense::Eq, 1.0).unwrap();
    prog.minimize(LinearExpr::scalar(t)).unwrap();
    let dump = prog.debug_dump().unwrap();
    let header = dump.lines().next().unwrap();
    assert!(header.starts_with("dims 5 "), "{header}");
    assert!(dump.lines().any(|l| l.starts_with("c 4 ")));
    assert!(dump.lines().any(|l| l.starts_with("b 0 ")));
}
