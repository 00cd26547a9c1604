//! State-preparation noise: qubit channels, their random mixture and
//! small random unitary rotations.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QmtError, Result};
use crate::quantum::{pauli_matrices, CMatrix, DensityMatrix, HermitianOperator, StateEnsemble};

/// The three incoherent qubit channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Depolarizing,
    AmplitudeDamping,
    PhaseDamping,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Depolarizing, Channel::AmplitudeDamping, Channel::PhaseDamping];

    /// Kraus operators for strength `p`.
    pub fn kraus(self, p: f64) -> Result<Vec<CMatrix>> {
        check_probability(p)?;
        let c = |re: f64| Complex64::new(re, 0.0);
        let ops = match self {
            Channel::Depolarizing => {
                let mut ops = vec![CMatrix::identity(2, 2).scale((1.0 - 0.75 * p).sqrt())];
                for s in pauli_matrices() {
                    ops.push(s.into_matrix().scale((0.25 * p).sqrt()));
                }
                ops
            }
            Channel::AmplitudeDamping => vec![
                CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - p).sqrt())]),
                CMatrix::from_row_slice(2, 2, &[c(0.0), c(p.sqrt()), c(0.0), c(0.0)]),
            ],
            Channel::PhaseDamping => vec![
                CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - p).sqrt())]),
                CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(p.sqrt())]),
            ],
        };
        Ok(ops)
    }

    /// `Σ K ρ K†`
    pub fn apply(self, rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
        check_qubit(rho.dim())?;
        let m = rho.op().matrix();
        let out = self
            .kraus(p)?
            .iter()
            .fold(CMatrix::zeros(2, 2), |acc, k| acc + k * m * k.adjoint());
        DensityMatrix::new(HermitianOperator::new(out)?)
    }

    /// Heisenberg-picture map `Σ K† A K`.
    pub fn apply_adjoint(self, op: &HermitianOperator, p: f64) -> Result<HermitianOperator> {
        check_qubit(op.dim())?;
        let m = op.matrix();
        let out = self
            .kraus(p)?
            .iter()
            .fold(CMatrix::zeros(2, 2), |acc, k| acc + k.adjoint() * m * k);
        HermitianOperator::new(out)
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QmtError::InvalidArgument(format!("noise strength {p} outside [0, 1]")));
    }
    Ok(())
}

fn check_qubit(d: usize) -> Result<()> {
    if d != 2 {
        return Err(QmtError::Dimension(format!("noise channels act on qubits, got d = {d}")));
    }
    Ok(())
}

/// `(1 − p) ρ + (p/2) I`
pub fn depolarizing(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    check_probability(p)?;
    check_qubit(rho.dim())?;
    let mut out = rho.op().scale(1.0 - p);
    out.add_scaled(0.5 * p, &HermitianOperator::identity(2));
    DensityMatrix::new(out)
}

pub fn amplitude_damping(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    Channel::AmplitudeDamping.apply(rho, p)
}

pub fn phase_damping(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    Channel::PhaseDamping.apply(rho, p)
}

fn apply_channel(channel: Channel, rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    match channel {
        Channel::Depolarizing => depolarizing(rho, p),
        other => other.apply(rho, p),
    }
}

/// Draws one channel uniformly at random.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R) -> Channel {
    Channel::ALL[rng.random_range(0..3)]
}

/// Applies an independently drawn channel of strength `p` to each state.
pub fn incoherent_mixture<R: Rng + ?Sized>(
    ensemble: &StateEnsemble,
    p: f64,
    rng: &mut R,
) -> Result<StateEnsemble> {
    check_probability(p)?;
    let states = ensemble
        .states()
        .iter()
        .map(|rho| apply_channel(random_channel(rng), rho, p))
        .collect::<Result<Vec<_>>>()?;
    ensemble.with_states(states)
}

/// The rotation
///
/// ```text
/// ⎡ e^{iψ} cos φ   −e^{−iϕ} sin φ ⎤
/// ⎣ e^{iϕ} sin φ    e^{−iψ} cos φ ⎦
/// ```
pub fn rotation(phi: f64, varphi: f64, psi: f64) -> CMatrix {
    let e = |t: f64| Complex64::from_polar(1.0, t);
    let (s, c) = phi.sin_cos();
    CMatrix::from_row_slice(
        2,
        2,
        &[e(psi) * c, -e(-varphi) * s, e(varphi) * s, e(-psi) * c],
    )
}

/// Random rotation close to the identity. `ψ` and `ϕ` are uniform on
/// `[0, 2π]`, `φ = arcsin √ζ` with `ζ` uniform on `[0, 1]`; `ψ` and `φ` are
/// then scaled by `epsilon` while `ϕ` is kept as drawn.
pub fn random_unitary_near_identity<R: Rng + ?Sized>(epsilon: f64, rng: &mut R) -> Result<CMatrix> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(QmtError::InvalidArgument(format!(
            "coherent noise magnitude {epsilon} outside [0, 1)"
        )));
    }
    let psi = rng.random_range(0.0..=2.0 * PI);
    let varphi = rng.random_range(0.0..=2.0 * PI);
    let zeta: f64 = rng.random_range(0.0..=1.0);
    let phi = zeta.sqrt().asin();
    Ok(rotation(epsilon * phi, varphi, epsilon * psi))
}

fn rotate<R: Rng + ?Sized>(rho: &DensityMatrix, epsilon: f64, rng: &mut R) -> Result<DensityMatrix> {
    let u = random_unitary_near_identity(epsilon, rng)?;
    DensityMatrix::new(rho.op().conjugate_by(&u)?)
}

/// Conjugates every state by its own random rotation of magnitude `epsilon`.
pub fn coherent_noise<R: Rng + ?Sized>(
    ensemble: &StateEnsemble,
    epsilon: f64,
    rng: &mut R,
) -> Result<StateEnsemble> {
    let states = ensemble
        .states()
        .iter()
        .map(|rho| rotate(rho, epsilon, rng))
        .collect::<Result<Vec<_>>>()?;
    ensemble.with_states(states)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    IncoherentMixture,
    CoherentRotation,
}

/// Noise model applied to prepared states.
///
/// `targets` restricts the noise to the states with those labels; when it is
/// absent every state is affected. `seed` is mixed into the noise stream by
/// the experiment harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    #[serde(default)]
    pub strength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<String>>,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            strength: 0.0,
            targets: None,
            seed: 0,
        }
    }

    pub fn incoherent(p: f64) -> Self {
        Self {
            kind: NoiseKind::IncoherentMixture,
            strength: p,
            ..Self::none()
        }
    }

    pub fn coherent(epsilon: f64) -> Self {
        Self {
            kind: NoiseKind::CoherentRotation,
            strength: epsilon,
            ..Self::none()
        }
    }

    pub fn with_targets<S: Into<String>>(mut self, targets: impl IntoIterator<Item = S>) -> Self {
        self.targets = Some(targets.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_strength(mut self, strength: f64) -> Self {
        self.strength = strength;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            NoiseKind::None => true,
            NoiseKind::IncoherentMixture => (0.0..=1.0).contains(&self.strength),
            NoiseKind::CoherentRotation => (0.0..1.0).contains(&self.strength),
        };
        if !ok {
            return Err(QmtError::InvalidArgument(format!(
                "strength {} out of range for {:?}",
                self.strength, self.kind
            )));
        }
        Ok(())
    }

    fn apply_one<R: Rng + ?Sized>(&self, rho: &DensityMatrix, rng: &mut R) -> Result<DensityMatrix> {
        match self.kind {
            NoiseKind::None => Ok(rho.clone()),
            NoiseKind::IncoherentMixture => apply_channel(random_channel(rng), rho, self.strength),
            NoiseKind::CoherentRotation => rotate(rho, self.strength, rng),
        }
    }

    /// Applies the noise to the targeted states, or to all of them.
    pub fn apply<R: Rng + ?Sized>(&self, ensemble: &StateEnsemble, rng: &mut R) -> Result<StateEnsemble> {
        match &self.targets {
            Some(t) => targeted_noise(ensemble, t, self, rng),
            None => {
                self.validate()?;
                let states = ensemble
                    .states()
                    .iter()
                    .map(|rho| self.apply_one(rho, rng))
                    .collect::<Result<Vec<_>>>()?;
                ensemble.with_states(states)
            }
        }
    }
}

/// Applies `spec` to the states named in `targets` only.
pub fn targeted_noise<R: Rng + ?Sized>(
    ensemble: &StateEnsemble,
    targets: &[String],
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<StateEnsemble> {
    spec.validate()?;
    let mut hit = vec![false; ensemble.len()];
    for t in targets {
        let j = ensemble.index_of(t).ok_or_else(|| QmtError::UnknownLabel(t.clone()))?;
        hit[j] = true;
    }
    let states = ensemble
        .states()
        .iter()
        .zip(&hit)
        .map(|(rho, &h)| if h { spec.apply_one(rho, rng) } else { Ok(rho.clone()) })
        .collect::<Result<Vec<_>>>()?;
    ensemble.with_states(states)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depolarizing_kraus_matches_closed_form() {
        let rho = crate::quantum::pauli_eigenstate_ensemble().states()[2].clone();
        for p in [0.0, 0.3, 1.0] {
            let a = depolarizing(&rho, p).unwrap();
            let b = Channel::Depolarizing.apply(&rho, p).unwrap();
            assert!(a.op().max_abs_diff(b.op()) < 1e-14);
        }
    }
}
