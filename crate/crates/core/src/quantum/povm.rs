use serde::{Deserialize, Serialize};

use super::operator::HermitianOperator;
use super::states::operator_rank;
use crate::error::{QmtError, Result};

/// Eigenvalue tolerance for effects.
pub const EFFECT_TOL: f64 = 1e-9;
/// Entrywise tolerance for `Σ Π_k = I`.
pub const COMPLETENESS_TOL: f64 = 1e-8;

/// Positive operator-valued measure: PSD effects summing to the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmRepr", into = "PovmRepr")]
pub struct Povm {
    effects: Vec<HermitianOperator>,
}

#[derive(Serialize, Deserialize)]
struct PovmRepr {
    dim: usize,
    effects: Vec<HermitianOperator>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self> {
        Self::with_tolerances(effects, EFFECT_TOL, COMPLETENESS_TOL)
    }

    /// Validates with `tol` for both positivity and completeness.
    pub fn with_tolerance(effects: Vec<HermitianOperator>, tol: f64) -> Result<Self> {
        Self::with_tolerances(effects, tol, tol)
    }

    pub fn with_tolerances(
        effects: Vec<HermitianOperator>,
        eig_tol: f64,
        sum_tol: f64,
    ) -> Result<Self> {
        let Some(first) = effects.first() else {
            return Err(QmtError::InvalidArgument("POVM needs at least one effect".into()));
        };
        let d = first.dim();
        let mut sum = HermitianOperator::zeros(d);
        for (k, e) in effects.iter().enumerate() {
            if e.dim() != d {
                return Err(QmtError::Dimension("effects differ in dimension".into()));
            }
            let min = e.min_eigenvalue();
            if min < -eig_tol {
                return Err(QmtError::InvalidOperator(format!(
                    "effect {k} has negative eigenvalue {min}"
                )));
            }
            sum.add_scaled(1.0, e);
        }
        let dev = sum.max_abs_diff(&HermitianOperator::identity(d));
        if dev > sum_tol {
            return Err(QmtError::InvalidOperator(format!(
                "effects sum to identity only within {dev}"
            )));
        }
        Ok(Self { effects })
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    /// Number of outcomes.
    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    /// Whether the effects span the full operator space.
    pub fn is_informationally_complete(&self) -> bool {
        operator_rank(&self.effects.iter().collect::<Vec<_>>()) == self.dim() * self.dim()
    }

    /// Maps each effect, keeping the outcome order. The result is validated.
    pub fn map_effects(&self, f: impl Fn(&HermitianOperator) -> HermitianOperator) -> Result<Self> {
        Self::new(self.effects.iter().map(f).collect())
    }
}

impl TryFrom<PovmRepr> for Povm {
    type Error = QmtError;

    fn try_from(r: PovmRepr) -> Result<Self> {
        let p = Self::new(r.effects)?;
        if p.dim() != r.dim {
            return Err(QmtError::Dimension(format!(
                "declared dim {} but effects have dim {}",
                r.dim,
                p.dim()
            )));
        }
        Ok(p)
    }
}

impl From<Povm> for PovmRepr {
    fn from(p: Povm) -> Self {
        Self {
            dim: p.dim(),
            effects: p.effects,
        }
    }
}
