use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::conic::SolveOptions;
use crate::error::{QmtError, Result};
use crate::estimators::Method;
use crate::noise::{NoiseKind, NoiseSpec};
use crate::quantum::{Povm, StateEnsemble};

/// Current config schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    ShotNoise,
    Incoherent,
    Coherent,
    Targeted,
    Seesaw,
    Bench,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PovmSource {
    /// Qubit SIC-POVM.
    Sic,
    /// Random POVM with `outcomes` effects, redrawn per repetition.
    Random { dim: usize, outcomes: usize },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleSource {
    /// Random informationally complete states, redrawn per repetition.
    Random { dim: usize, states: usize },
    /// The six Pauli eigenstates.
    Pauli6,
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeesawConfig {
    pub nu_delta: f64,
    pub max_steps: usize,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            nu_delta: 1e-7,
            max_steps: 200,
        }
    }
}

/// Size of the input ensemble relative to the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleSize {
    /// `N = d²`
    Complete,
    /// `N = d(d + 1)`
    Overcomplete,
}

impl EnsembleSize {
    pub fn states(self, d: usize) -> usize {
        match self {
            EnsembleSize::Complete => d * d,
            EnsembleSize::Overcomplete => d * (d + 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnsembleSize::Complete => "complete",
            EnsembleSize::Overcomplete => "overcomplete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub dims: Vec<usize>,
    pub shots_per_state: Vec<u64>,
    pub ensembles: Vec<EnsembleSize>,
    pub methods: Vec<Method>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3],
            shots_per_state: vec![10_000],
            ensembles: vec![EnsembleSize::Complete],
            methods: vec![Method::SingleDelta, Method::ManyDeltas, Method::LogMle],
        }
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_reps() -> usize {
    20
}

fn default_povm() -> PovmSource {
    PovmSource::Sic
}

fn default_ensemble() -> EnsembleSource {
    EnsembleSource::Random { dim: 2, states: 4 }
}

fn default_noise() -> NoiseSpec {
    NoiseSpec::none()
}

fn default_estimator() -> Method {
    Method::SingleDelta
}

/// A batch of simulated tomography experiments.
///
/// The batch sweeps the cartesian product of `n_shots` and `strengths`
/// (one sweep cell per pair) and runs `repetitions` experiments per cell.
/// An empty `strengths` list means the single strength in `noise`. A shot
/// count of zero stands for exact (infinite-shot) frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub scenario: Scenario,
    #[serde(default = "default_povm")]
    pub povm: PovmSource,
    #[serde(default = "default_ensemble")]
    pub ensemble: EnsembleSource,
    #[serde(default)]
    pub n_shots: Vec<u64>,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default = "default_noise")]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub strengths: Vec<f64>,
    #[serde(default = "default_estimator")]
    pub estimator: Method,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seesaw: SeesawConfig,
    #[serde(default)]
    pub bench: BenchConfig,
    #[serde(default)]
    pub solver: SolveOptions,
    /// Frequency table to fit with the `fit` command instead of simulating.
    #[serde(default)]
    pub frequencies_file: Option<PathBuf>,
    /// Repetition indices that fail on purpose, for exercising error paths.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fail_repetitions: Vec<usize>,
}

impl ExperimentConfig {
    /// A config with defaults for everything but the scenario.
    pub fn new(scenario: Scenario) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario,
            povm: default_povm(),
            ensemble: default_ensemble(),
            n_shots: vec![600_000],
            repetitions: default_reps(),
            noise: default_noise(),
            strengths: Vec::new(),
            estimator: default_estimator(),
            seed: 0,
            output_dir: None,
            seesaw: SeesawConfig::default(),
            bench: BenchConfig::default(),
            solver: SolveOptions::default(),
            frequencies_file: None,
            fail_repetitions: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| QmtError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QmtError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Noise strengths swept by the batch.
    pub fn strength_sweep(&self) -> Vec<f64> {
        if self.strengths.is_empty() {
            vec![self.noise.strength]
        } else {
            self.strengths.clone()
        }
    }

    /// Number of input states, loading the ensemble file if needed.
    pub fn num_states(&self) -> Result<usize> {
        Ok(match &self.ensemble {
            EnsembleSource::Random { states, .. } => *states,
            EnsembleSource::Pauli6 => 6,
            EnsembleSource::File { path } => load_ensemble(path)?.len(),
        })
    }

    pub fn dim(&self) -> Result<usize> {
        Ok(match &self.ensemble {
            EnsembleSource::Random { dim, .. } => *dim,
            EnsembleSource::Pauli6 => 2,
            EnsembleSource::File { path } => load_ensemble(path)?.dim(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(QmtError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.repetitions == 0 {
            return err("repetitions must be at least 1".into());
        }
        if self.scenario == Scenario::Bench {
            let b = &self.bench;
            if b.dims.is_empty() || b.dims.iter().any(|d| *d < 2) {
                return err("bench dims must be nonempty and ≥ 2".into());
            }
            if b.shots_per_state.is_empty() || b.shots_per_state.contains(&0) {
                return err("bench shots_per_state must be nonempty and positive".into());
            }
            if b.ensembles.is_empty() || b.methods.is_empty() {
                return err("bench needs ensembles and methods".into());
            }
            return Ok(());
        }
        if self.n_shots.is_empty() {
            return err("n_shots must list at least one shot count".into());
        }
        let n = self.num_states()?;
        let d = self.dim()?;
        if let EnsembleSource::Random { dim, states } = self.ensemble {
            if dim < 2 || states < dim * dim {
                return err(format!("random ensemble needs dim ≥ 2 and at least {} states", dim * dim));
            }
        }
        match &self.povm {
            PovmSource::Sic if d != 2 => return err("the SIC-POVM is a qubit measurement".into()),
            PovmSource::Random { dim, outcomes } if *dim != d || *outcomes < 2 => {
                return err(format!("random POVM must have dim {d} and ≥ 2 outcomes"))
            }
            PovmSource::File { path } => {
                let p = load_povm(path)?;
                if p.dim() != d {
                    return err(format!("POVM file has dim {}, ensemble has {d}", p.dim()));
                }
            }
            _ => {}
        }
        for s in &self.n_shots {
            if *s % n as u64 != 0 {
                return err(format!("n_shots {s} is not divisible by the {n} input states"));
            }
        }
        for strength in self.strength_sweep() {
            self.noise
                .clone()
                .with_strength(strength)
                .validate()
                .map_err(|e| QmtError::Config(e.to_string()))?;
        }
        if self.noise.kind != NoiseKind::None && d != 2 {
            return err("noise models act on qubits only".into());
        }
        let expected = match self.scenario {
            Scenario::Incoherent => Some(NoiseKind::IncoherentMixture),
            Scenario::Coherent => Some(NoiseKind::CoherentRotation),
            _ => None,
        };
        if let Some(kind) = expected {
            if self.noise.kind != kind {
                return err(format!("{:?} scenario needs noise kind {kind:?}", self.scenario));
            }
        }
        if self.scenario == Scenario::Targeted && self.noise.targets.as_ref().is_none_or(|t| t.is_empty()) {
            return err("targeted scenario needs noise targets".into());
        }
        if self.scenario == Scenario::Seesaw && (self.seesaw.max_steps == 0 || self.seesaw.nu_delta <= 0.0) {
            return err("seesaw needs max_steps ≥ 1 and nu_delta > 0".into());
        }
        if matches!(self.estimator, Method::LinearInversion | Method::StateTomography) {
            return err(format!("{} is not a batch estimator", self.estimator.name()));
        }
        Ok(())
    }
}

pub fn load_povm(path: &Path) -> Result<Povm> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| QmtError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| QmtError::Config(format!("{}: {e}", path.display())))
}

pub fn load_ensemble(path: &Path) -> Result<StateEnsemble> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| QmtError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| QmtError::Config(format!("{}: {e}", path.display())))
}
