//! A small dense interior-point solver for linear and semidefinite cone
//! programs.
//!
//! Problems are posed as
//!
//! ```text
//! minimize c'x  subject to  A x = b,  G x + s = h,  s ∈ R^l_+ × S^{n_1}_+ × ... × S^{n_k}_+
//! ```
//!
//! and solved with a Mehrotra predictor-corrector method on the homogeneous
//! self-dual embedding, using Nesterov-Todd scaling for the semidefinite
//! blocks. Everything is dense and single-threaded; the solver targets
//! programs with a few hundred to a couple of thousand variables.
//!
//! ```
//! use nalgebra::{dmatrix, DVector};
//! use symcone::{ConicProblem, Settings, SparseRow, Status};
//!
//! // minimize x0 + x1  s.t.  [[x0, 1], [1, x1]] ⪰ 0
//! let mut p = ConicProblem::new(2);
//! p.set_objective(DVector::from_vec(vec![1.0, 1.0])).unwrap();
//! p.add_lmi(
//!     dmatrix![0.0, 1.0; 1.0, 0.0],
//!     vec![(0, dmatrix![1.0, 0.0; 0.0, 0.0]), (1, dmatrix![0.0, 0.0; 0.0, 1.0])],
//! )
//! .unwrap();
//! let sol = symcone::solve(&p, &Settings::default());
//! assert_eq!(sol.status, Status::Optimal);
//! assert!((sol.primal_objective - 2.0).abs() < 1e-7);
//! # let _ = SparseRow::default();
//! ```

mod cone;
mod error;
mod ipm;
mod kkt;
mod problem;

pub use error::ConeError;
pub use ipm::{solve, Settings, Solution, Status};
pub use problem::{ConicProblem, PsdBlock, SparseRow};
