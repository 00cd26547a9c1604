//! Problem data for cone programs of the form
//!
//! ```text
//! minimize    c'x
//! subject to  A x = b
//!             G x + s = h,   s in K
//! ```
//!
//! where `K` is a product of a nonnegative orthant and real symmetric
//! positive semidefinite cones. Linear rows are stored sparsely; each PSD
//! block keeps one dense coefficient matrix per variable that appears in it.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::ConeError;

/// Sparse row `Σ coeff·x[index]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseRow {
    pub entries: Vec<(usize, f64)>,
}

impl SparseRow {
    pub fn new(entries: Vec<(usize, f64)>) -> Self {
        Self { entries }
    }

    pub fn dot(&self, x: &DVector<f64>) -> f64 {
        self.entries.iter().map(|&(j, a)| a * x[j]).sum()
    }

    fn max_index(&self) -> Option<usize> {
        self.entries.iter().map(|&(j, _)| j).max()
    }
}

/// One semidefinite block `h - Σ_j x_j G_j ⪰ 0`.
#[derive(Debug, Clone)]
pub struct PsdBlock {
    pub size: usize,
    /// Variable coefficients in the `G` convention (`s = h - G x`).
    pub terms: Vec<(usize, DMatrix<f64>)>,
    pub constant: DMatrix<f64>,
}

impl PsdBlock {
    /// `G x` restricted to this block.
    pub(crate) fn apply(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.size, self.size);
        for (j, g) in &self.terms {
            if x[*j] != 0.0 {
                out += g * x[*j];
            }
        }
        out
    }
}

/// A cone program in the `(c, A, b, G, h)` standard form.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    num_vars: usize,
    pub(crate) c: DVector<f64>,
    pub(crate) eq_rows: Vec<SparseRow>,
    pub(crate) eq_rhs: Vec<f64>,
    pub(crate) lp_rows: Vec<SparseRow>,
    pub(crate) lp_rhs: Vec<f64>,
    pub(crate) psd: Vec<PsdBlock>,
}

impl ConicProblem {
    /// Empty program over `num_vars` free variables with zero objective.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            c: DVector::zeros(num_vars),
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            lp_rows: Vec::new(),
            lp_rhs: Vec::new(),
            psd: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_eq(&self) -> usize {
        self.eq_rows.len()
    }

    pub fn num_lp(&self) -> usize {
        self.lp_rows.len()
    }

    pub fn psd_sizes(&self) -> Vec<usize> {
        self.psd.iter().map(|b| b.size).collect()
    }

    pub fn set_objective(&mut self, c: DVector<f64>) -> Result<(), ConeError> {
        if c.len() != self.num_vars {
            return Err(ConeError::Dimension(format!(
                "objective has length {}, expected {}",
                c.len(),
                self.num_vars
            )));
        }
        self.c = c;
        Ok(())
    }

    pub fn objective(&self) -> &DVector<f64> {
        &self.c
    }

    /// Adds `row · x = rhs`.
    pub fn add_eq(&mut self, row: SparseRow, rhs: f64) -> Result<usize, ConeError> {
        self.check_row(&row)?;
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        Ok(self.eq_rows.len() - 1)
    }

    /// Adds `row · x <= rhs`.
    pub fn add_le(&mut self, row: SparseRow, rhs: f64) -> Result<usize, ConeError> {
        self.check_row(&row)?;
        self.lp_rows.push(row);
        self.lp_rhs.push(rhs);
        Ok(self.lp_rows.len() - 1)
    }

    /// Adds the linear matrix inequality `constant + Σ x_j F_j ⪰ 0`.
    ///
    /// All matrices must be symmetric and share the same size.
    pub fn add_lmi(
        &mut self,
        constant: DMatrix<f64>,
        terms: Vec<(usize, DMatrix<f64>)>,
    ) -> Result<usize, ConeError> {
        let size = constant.nrows();
        if constant.ncols() != size || size == 0 {
            return Err(ConeError::Dimension("LMI constant must be square".into()));
        }
        check_symmetric(&constant)?;
        let mut g_terms = Vec::with_capacity(terms.len());
        for (j, f) in terms {
            if j >= self.num_vars {
                return Err(ConeError::Dimension(format!("variable index {j} out of range")));
            }
            if f.nrows() != size || f.ncols() != size {
                return Err(ConeError::Dimension("LMI term size mismatch".into()));
            }
            check_symmetric(&f)?;
            g_terms.push((j, -f));
        }
        self.psd.push(PsdBlock {
            size,
            terms: g_terms,
            constant,
        });
        Ok(self.psd.len() - 1)
    }

    fn check_row(&self, row: &SparseRow) -> Result<(), ConeError> {
        match row.max_index() {
            Some(j) if j >= self.num_vars => Err(ConeError::Dimension(format!(
                "variable index {j} out of range ({} variables)",
                self.num_vars
            ))),
            _ => Ok(()),
        }
    }

    /// Barrier degree of the cone (orthant rows plus PSD block sizes).
    pub fn degree(&self) -> usize {
        self.lp_rows.len() + self.psd.iter().map(|b| b.size).sum::<usize>()
    }

    /// Writes the problem as whitespace-separated triplets.
    ///
    /// Line kinds (indices are zero-based):
    ///
    /// ```text
    /// dims <n> <p> <l> <k> <size_0> ... <size_{k-1}>
    /// c <j> <value>
    /// A <row> <j> <value>
    /// b <row> <value>
    /// G <row> <j> <value>
    /// h <row> <value>
    /// S <block> <r> <c> <j> <value>     (G coefficient, lower triangle)
    /// H <block> <r> <c> <value>         (h constant, lower triangle)
    /// ```
    ///
    /// Only nonzero entries are listed. Values are printed with 17
    /// significant digits so the dump round-trips exactly.
    pub fn to_triplet_string(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "dims {} {} {} {}",
            self.num_vars,
            self.eq_rows.len(),
            self.lp_rows.len(),
            self.psd.len()
        );
        for b in &self.psd {
            let _ = write!(out, " {}", b.size);
        }
        out.push('\n');
        for (j, v) in self.c.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "c {j} {v:.16e}");
            }
        }
        for (i, row) in self.eq_rows.iter().enumerate() {
            for &(j, v) in &row.entries {
                let _ = writeln!(out, "A {i} {j} {v:.16e}");
            }
            if self.eq_rhs[i] != 0.0 {
                let _ = writeln!(out, "b {i} {:.16e}", self.eq_rhs[i]);
            }
        }
        for (i, row) in self.lp_rows.iter().enumerate() {
            for &(j, v) in &row.entries {
                let _ = writeln!(out, "G {i} {j} {v:.16e}");
            }
            if self.lp_rhs[i] != 0.0 {
                let _ = writeln!(out, "h {i} {:.16e}", self.lp_rhs[i]);
            }
        }
        for (k, block) in self.psd.iter().enumerate() {
            for (j, g) in &block.terms {
                for c in 0..block.size {
                    for r in c..block.size {
                        let v = g[(r, c)];
                        if v != 0.0 {
                            let _ = writeln!(out, "S {k} {r} {c} {j} {v:.16e}");
                        }
                    }
                }
            }
            for c in 0..block.size {
                for r in c..block.size {
                    let v = block.constant[(r, c)];
                    if v != 0.0 {
                        let _ = writeln!(out, "H {k} {r} {c} {v:.16e}");
                    }
                }
            }
        }
        out
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<(), ConeError> {
    let scale = m.amax().max(1.0);
    for c in 0..m.ncols() {
        for r in (c + 1)..m.nrows() {
            if (m[(r, c)] - m[(c, r)]).abs() > 1e-12 * scale {
                return Err(ConeError::NotSymmetric);
            }
        }
    }
    Ok(())
}
