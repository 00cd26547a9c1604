//! Finite-shot simulation of measurement experiments.

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{QmtError, Result};
use crate::quantum::{born_probabilities, Povm, StateEnsemble};

/// Outcome frequencies `f_jk` for `N` input states and `m` outcomes.
///
/// Sampled tables carry integer counts, and each frequency row sums to one
/// exactly up to the final division. Tables built from exact probabilities
/// have no counts and zero shots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct FrequencyTable {
    counts: Option<DMatrix<u64>>,
    shots_per_state: u64,
    frequencies: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<Vec<u64>>>,
    shots_per_state: u64,
    total_shots: u64,
    frequencies: Vec<Vec<f64>>,
}

impl FrequencyTable {
    /// Builds a table from per-state counts; all rows must share one positive total.
    pub fn from_counts(counts: DMatrix<u64>) -> Result<Self> {
        if counts.nrows() == 0 || counts.ncols() == 0 {
            return Err(QmtError::InvalidArgument("empty count table".into()));
        }
        let shots: u64 = counts.row(0).iter().sum();
        if shots == 0 {
            return Err(QmtError::InvalidArgument("rows must contain shots".into()));
        }
        for (j, row) in counts.row_iter().enumerate() {
            let s: u64 = row.iter().sum();
            if s != shots {
                return Err(QmtError::InvalidArgument(format!(
                    "row {j} has {s} shots, expected {shots}"
                )));
            }
        }
        let frequencies = counts.map(|c| c as f64 / shots as f64);
        Ok(Self {
            counts: Some(counts),
            shots_per_state: shots,
            frequencies,
        })
    }

    /// Wraps exact probabilities (rows summing to one within `1e-9`).
    pub fn from_probabilities(frequencies: DMatrix<f64>) -> Result<Self> {
        if frequencies.nrows() == 0 || frequencies.ncols() == 0 {
            return Err(QmtError::InvalidArgument("empty frequency table".into()));
        }
        for (j, row) in frequencies.row_iter().enumerate() {
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(QmtError::InvalidArgument(format!("row {j} leaves [0, 1]")));
            }
            let s = row.sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(QmtError::InvalidArgument(format!("row {j} sums to {s}")));
            }
        }
        Ok(Self {
            counts: None,
            shots_per_state: 0,
            frequencies,
        })
    }

    pub fn num_states(&self) -> usize {
        self.frequencies.nrows()
    }

    pub fn num_outcomes(&self) -> usize {
        self.frequencies.ncols()
    }

    pub fn frequencies(&self) -> &DMatrix<f64> {
        &self.frequencies
    }

    pub fn counts(&self) -> Option<&DMatrix<u64>> {
        self.counts.as_ref()
    }

    pub fn shots_per_state(&self) -> u64 {
        self.shots_per_state
    }

    pub fn total_shots(&self) -> u64 {
        self.shots_per_state * self.num_states() as u64
    }

    /// Whether the table holds exact probabilities rather than sampled counts.
    pub fn is_exact(&self) -> bool {
        self.counts.is_none()
    }

    /// Writes `state_index,outcome_index,count,frequency` rows. The count
    /// column is empty for exact tables.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["state_index", "outcome_index", "count", "frequency"])?;
        for j in 0..self.num_states() {
            for k in 0..self.num_outcomes() {
                let count = self.counts.as_ref().map(|c| c[(j, k)].to_string()).unwrap_or_default();
                w.write_record([
                    j.to_string(),
                    k.to_string(),
                    count,
                    self.frequencies[(j, k)].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl TryFrom<TableRepr> for FrequencyTable {
    type Error = QmtError;

    fn try_from(r: TableRepr) -> Result<Self> {
        let rows = r.frequencies.len();
        let cols = r.frequencies.first().map_or(0, Vec::len);
        if r.frequencies.iter().any(|row| row.len() != cols) {
            return Err(QmtError::Dimension("ragged frequency table".into()));
        }
        let table = match r.counts {
            Some(c) => {
                if c.len() != rows || c.iter().any(|row| row.len() != cols) {
                    return Err(QmtError::Dimension("counts and frequencies differ in shape".into()));
                }
                Self::from_counts(DMatrix::from_fn(rows, cols, |j, k| c[j][k]))?
            }
            None => Self::from_probabilities(DMatrix::from_fn(rows, cols, |j, k| r.frequencies[j][k]))?,
        };
        if table.shots_per_state != r.shots_per_state || table.total_shots() != r.total_shots {
            return Err(QmtError::InvalidArgument("shot bookkeeping does not match counts".into()));
        }
        Ok(table)
    }
}

impl From<FrequencyTable> for TableRepr {
    fn from(t: FrequencyTable) -> Self {
        let total_shots = t.total_shots();
        Self {
            counts: t.counts.as_ref().map(|c| c.row_iter().map(|r| r.iter().copied().collect()).collect()),
            shots_per_state: t.shots_per_state,
            total_shots,
            frequencies: t.frequencies.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

/// One multinomial draw of `n` trials, as a chain of conditional binomials.
pub fn multinomial<R: Rng + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = vec![0; probs.len()];
    let mut remaining = n;
    let mut mass: f64 = probs.iter().sum();
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            out[k] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, q).expect("probability in [0, 1]").sample(rng);
        out[k] = draw;
        remaining -= draw;
        mass -= p;
    }
    out
}

/// Simulates `total_shots` measurements split evenly across the states.
pub fn sample_frequencies<R: Rng + ?Sized>(
    states: &StateEnsemble,
    povm: &Povm,
    total_shots: u64,
    rng: &mut R,
) -> Result<FrequencyTable> {
    let n = states.len() as u64;
    if total_shots == 0 || !total_shots.is_multiple_of(n) {
        return Err(QmtError::InvalidArgument(format!(
            "total shots {total_shots} must be a positive multiple of the {n} states"
        )));
    }
    let probs = born_probabilities(states, povm)?;
    let shots = total_shots / n;
    let mut counts = DMatrix::zeros(probs.nrows(), probs.ncols());
    for j in 0..probs.nrows() {
        let row: Vec<f64> = probs.row(j).iter().copied().collect();
        let s: f64 = row.iter().sum();
        let row: Vec<f64> = row.iter().map(|p| p / s).collect();
        for (k, c) in multinomial(shots, &row, rng).into_iter().enumerate() {
            counts[(j, k)] = c;
        }
    }
    FrequencyTable::from_counts(counts)
}

/// The infinite-shot table: frequencies equal Born probabilities.
pub fn exact_frequencies(states: &StateEnsemble, povm: &Povm) -> Result<FrequencyTable> {
    let mut probs = born_probabilities(states, povm)?;
    for mut row in probs.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    FrequencyTable::from_probabilities(probs)
}
