use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::HermitianBasis;
use super::operator::HermitianOperator;
use crate::error::{QmtError, Result};

/// Tolerance for eigenvalue positivity and unit trace of states.
pub const STATE_TOL: f64 = 1e-9;

/// Relative singular-value threshold for the informational-completeness rank test.
pub const IC_RANK_TOL: f64 = 1e-8;

/// A positive semidefinite, unit-trace Hermitian operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianOperator", into = "HermitianOperator")]
pub struct DensityMatrix(HermitianOperator);

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::with_tolerance(op, STATE_TOL)
    }

    /// Validates with a custom tolerance on eigenvalues and trace.
    pub fn with_tolerance(op: HermitianOperator, tol: f64) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > tol {
            return Err(QmtError::InvalidOperator(format!("state has trace {tr}")));
        }
        let min = op.min_eigenvalue();
        if min < -tol {
            return Err(QmtError::InvalidOperator(format!(
                "state has negative eigenvalue {min}"
            )));
        }
        Ok(Self(op))
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let n = psi.norm_squared();
        if n == 0.0 || !n.is_finite() {
            return Err(QmtError::InvalidArgument("state vector has zero norm".into()));
        }
        Self::new(HermitianOperator::projector(psi).scale(1.0 / n))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(HermitianOperator::identity(d).scale(1.0 / d as f64))
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn into_op(self) -> HermitianOperator {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `Tr(ρ²)`
    pub fn purity(&self) -> f64 {
        self.0.inner(&self.0)
    }
}

impl TryFrom<HermitianOperator> for DensityMatrix {
    type Error = QmtError;

    fn try_from(op: HermitianOperator) -> Result<Self> {
        Self::new(op)
    }
}

impl From<DensityMatrix> for HermitianOperator {
    fn from(rho: DensityMatrix) -> Self {
        rho.0
    }
}

/// Rank of a set of operators viewed as real vectors in the `d²`-dimensional
/// Hermitian space.
pub fn operator_rank(ops: &[&HermitianOperator]) -> usize {
    let Some(first) = ops.first() else {
        return 0;
    };
    let basis = HermitianBasis::new(first.dim());
    let mut m = DMatrix::zeros(ops.len(), basis.len());
    for (j, op) in ops.iter().enumerate() {
        m.row_mut(j).copy_from(&basis.coordinates(op).transpose());
    }
    let sv = m.singular_values();
    let max = sv.max();
    if max <= 0.0 {
        return 0;
    }
    sv.iter().filter(|v| **v >= IC_RANK_TOL * max).count()
}

/// An ordered list of input states, optionally labeled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleRepr", into = "EnsembleRepr")]
pub struct StateEnsemble {
    states: Vec<DensityMatrix>,
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleRepr {
    dim: usize,
    states: Vec<DensityMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl StateEnsemble {
    pub fn new(states: Vec<DensityMatrix>) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(QmtError::InvalidArgument("ensemble must contain a state".into()));
        };
        let d = first.dim();
        if states.iter().any(|s| s.dim() != d) {
            return Err(QmtError::Dimension("ensemble states differ in dimension".into()));
        }
        Ok(Self {
            states,
            labels: None,
        })
    }

    pub fn with_labels(states: Vec<DensityMatrix>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != states.len() {
            return Err(QmtError::InvalidArgument(format!(
                "{} labels for {} states",
                labels.len(),
                states.len()
            )));
        }
        let mut e = Self::new(states)?;
        e.labels = Some(labels);
        Ok(e)
    }

    /// Returns `self` if it spans the full operator space.
    pub fn require_ic(self) -> Result<Self> {
        let rank = self.ic_rank();
        let needed = self.dim() * self.dim();
        if rank < needed {
            return Err(QmtError::NotInformationallyComplete { rank, needed });
        }
        Ok(self)
    }

    pub fn ic_rank(&self) -> usize {
        operator_rank(&self.states.iter().map(|s| s.op()).collect::<Vec<_>>())
    }

    pub fn is_informationally_complete(&self) -> bool {
        self.ic_rank() == self.dim() * self.dim()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// The label of state `j`, or its index when unlabeled.
    pub fn label(&self, j: usize) -> String {
        match &self.labels {
            Some(l) => l[j].clone(),
            None => j.to_string(),
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        (0..self.len()).find(|&j| self.label(j) == label)
    }

    /// Replaces the states, keeping the labels.
    pub fn with_states(&self, states: Vec<DensityMatrix>) -> Result<Self> {
        match &self.labels {
            Some(l) => Self::with_labels(states, l.clone()),
            None => Self::new(states),
        }
    }
}

impl TryFrom<EnsembleRepr> for StateEnsemble {
    type Error = QmtError;

    fn try_from(r: EnsembleRepr) -> Result<Self> {
        let e = match r.labels {
            Some(l) => Self::with_labels(r.states, l)?,
            None => Self::new(r.states)?,
        };
        if e.dim() != r.dim {
            return Err(QmtError::Dimension(format!(
                "declared dim {} but states have dim {}",
                r.dim,
                e.dim()
            )));
        }
        Ok(e)
    }
}

impl From<StateEnsemble> for EnsembleRepr {
    fn from(e: StateEnsemble) -> Self {
        Self {
            dim: e.dim(),
            states: e.states,
            labels: e.labels,
        }
    }
}
