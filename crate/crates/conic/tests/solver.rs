use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use symcone::{solve, ConicProblem, Settings, SparseRow, Status};

/// Brute-force LP oracle: enumerate every basis of `n` active inequality
/// rows, keep the feasible vertices and return the best objective.
fn lp_vertex_oracle(c: &[f64], rows: &[(Vec<f64>, f64)]) -> Option<f64> {
    let n = c.len();
    let m = rows.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = DMatrix::from_fn(n, n, |i, j| rows[idx[i]].0[j]);
        let b = DVector::from_fn(n, |i, _| rows[idx[i]].1);
        if let Some(x) = a.lu().solve(&b) {
            let feasible = rows.iter().all(|(r, h)| {
                let v: f64 = r.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                v <= h + 1e-9
            });
            if feasible && x.iter().all(|v| v.is_finite()) {
                let obj: f64 = c.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] != i + m - n {
                break;
            }
            if i == 0 && idx[0] == m - n {
                return best;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn lp_problem(c: &[f64], rows: &[(Vec<f64>, f64)]) -> ConicProblem {
    let mut p = ConicProblem::new(c.len());
    p.set_objective(DVector::from_column_slice(c)).unwrap();
    for (r, h) in rows {
        let entries = r.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
        p.add_le(SparseRow::new(entries), *h).unwrap();
    }
    p
}

fn boxed_rows(n: usize, extra: Vec<(Vec<f64>, f64)>) -> Vec<(Vec<f64>, f64)> {
    let mut rows = extra;
    for j in 0..n {
        let mut up = vec![0.0; n];
        up[j] = 1.0;
        rows.push((up.clone(), 2.0));
        up[j] = -1.0;
        rows.push((up, 2.0));
    }
    rows
}

#[test]
fn lp_matches_vertex_enumeration() {
    let c = [1.0, -2.0, 0.5];
    let rows = boxed_rows(
        3,
        vec![
            (vec![1.0, 1.0, 1.0], 1.0),
            (vec![-1.0, 2.0, 0.0], 1.5),
            (vec![0.0, 1.0, -1.0], 0.25),
        ],
    );
    let oracle = lp_vertex_oracle(&c, &rows).unwrap();
    let sol = solve(&lp_problem(&c, &rows), &Settings::default());
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.primal_objective - oracle).abs() < 1e-6, "{} vs {}", sol.primal_objective, oracle);
}

#[test]
fn trivial_bound_gives_zero() {
    // minimize δ s.t. δ ≥ 0
    let mut p = ConicProblem::new(1);
    p.set_objective(DVector::from_vec(vec![1.0])).unwrap();
    p.add_le(SparseRow::new(vec![(0, -1.0)]), 0.0).unwrap();
    let sol = solve(&p, &Settings::default());
    assert_eq!(sol.status, Status::Optimal);
    assert!(sol.x[0].abs() < 1e-8);
}

/// Symmetric 3×3 basis for parametrizing X.
fn sym_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut m = DMatrix::zeros(n, n);
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
            out.push(m);
        }
    }
    out
}

#[test]
fn min_trace_product_is_smallest_eigenvalue() {
    let cm = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.3, -1.0, 1.0, 0.7, 0.3, 0.7, 3.0]);
    let basis = sym_basis(3);
    let mut p = ConicProblem::new(basis.len());
    p.set_objective(DVector::from_iterator(basis.len(), basis.iter().map(|b| b.dot(&cm))))
        .unwrap();
    let trace_row = basis.iter().enumerate().map(|(j, b)| (j, b.trace())).filter(|e| e.1 != 0.0).collect();
    p.add_eq(SparseRow::new(trace_row), 1.0).unwrap();
    p.add_lmi(DMatrix::zeros(3, 3), basis.iter().cloned().enumerate().collect()).unwrap();
    let sol = solve(&p, &Settings::default());
    assert_eq!(sol.status, Status::Optimal);
    let lmin = SymmetricEigen::new(cm).eigenvalues.min();
    assert!((sol.primal_objective - lmin).abs() < 1e-7);
    assert!(sol.primal_objective >= sol.dual_objective - 1e-8);
}

#[test]
fn detects_primal_infeasibility() {
    // x ≥ 1 and x ≤ 0
    let mut p = ConicProblem::new(1);
    p.set_objective(DVector::from_vec(vec![1.0])).unwrap();
    p.add_le(SparseRow::new(vec![(0, -1.0)]), -1.0).unwrap();
    p.add_le(SparseRow::new(vec![(0, 1.0)]), 0.0).unwrap();
    let sol = solve(&p, &Settings::default());
    assert_eq!(sol.status, Status::PrimalInfeasible);
}

#[test]
fn detects_unboundedness() {
    // minimize -x s.t. x ≥ 0
    let mut p = ConicProblem::new(1);
    p.set_objective(DVector::from_vec(vec![-1.0])).unwrap();
    p.add_le(SparseRow::new(vec![(0, -1.0)]), 0.0).unwrap();
    let sol = solve(&p, &Settings::default());
    assert_eq!(sol.status, Status::DualInfeasible);
}

#[test]
fn lmi_with_equality_and_orthant() {
    // minimize t s.t. [[t, r], [r, t]] ⪰ 0, r = 0.3  → t = 0.3
    let mut p = ConicProblem::new(2);
    p.set_objective(DVector::from_vec(vec![1.0, 0.0])).unwrap();
    p.add_eq(SparseRow::new(vec![(1, 1.0)]), 0.3).unwrap();
    p.add_lmi(
        DMatrix::zeros(2, 2),
        vec![
            (0, DMatrix::identity(2, 2)),
            (1, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])),
        ],
    )
    .unwrap();
    let sol = solve(&p, &Settings::default());
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.x[0] - 0.3).abs() < 1e-7);
}

#[test]
fn dump_lists_every_block() {
    let mut p = ConicProblem::new(2);
    p.set_objective(DVector::from_vec(vec![1.0, 0.0])).unwrap();
    p.add_eq(SparseRow::new(vec![(1, 1.0)]), 0.3).unwrap();
    p.add_le(SparseRow::new(vec![(0, -1.0)]), 0.0).unwrap();
    p.add_lmi(DMatrix::identity(2, 2), vec![(1, DMatrix::identity(2, 2))]).unwrap();
    let dump = p.to_triplet_string();
    let first = dump.lines().next().unwrap();
    assert_eq!(first, "dims 2 1 1 1 2");
    assert!(dump.lines().any(|l| l.starts_with("S 0 1 1 1 ")));
    assert!(dump.lines().any(|l| l.starts_with("H 0 0 0 ")));
    assert!(dump.lines().any(|l| l.starts_with("b 0 ")));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_boxed_lps_match_oracle(
        c in proptest::collection::vec(-1.0f64..1.0, 2),
        extra in proptest::collection::vec((proptest::collection::vec(-1.0f64..1.0, 2), 0.1f64..1.0), 0..4),
    ) {
        let rows = boxed_rows(2, extra);
        let oracle = lp_vertex_oracle(&c, &rows).unwrap();
        let sol = solve(&lp_problem(&c, &rows), &Settings::default());
        prop_assert_eq!(sol.status, Status::Optimal);
        prop_assert!((sol.primal_objective - oracle).abs() < 1e-6);
        prop_assert!(sol.primal_objective >= sol.dual_objective - 1e-8);
    }
}
