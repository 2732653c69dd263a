//! Observations, ground truth, decisions and the confusion accounting that
//! turns them into false discovery proportions and power.

use crate::error::{Error, Result};
use crate::Real;

/// Observed z-scores `y_j ~ N(β_j, 1)`, optionally with a known
/// equicorrelation `rho` of the noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector<T> {
    values: Vec<T>,
    rho: Option<T>,
}

impl<T: Real> ObservationVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        Self::with_rho(values, None)
    }

    pub fn with_rho(values: Vec<T>, rho: Option<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("observation vector must be non-empty".into()));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("observation {j} is not finite")));
        }
        if let Some(r) = rho {
            if !(r >= T::zero() && r < T::one()) {
                return Err(Error::Domain(format!("equicorrelation must lie in [0, 1), got {r}")));
            }
        }
        Ok(Self { values, rho })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn rho(&self) -> Option<T> {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::count(self.values.len())
    }
}

/// True means and the derived signal indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T> {
    beta: Vec<T>,
    signal: Vec<bool>,
}

impl<T: Real> GroundTruth<T> {
    /// Exact zeros are noise; anything else is signal.
    pub fn from_beta(beta: Vec<T>) -> Self {
        let signal = beta.iter().map(|b| *b != T::zero()).collect();
        Self { beta, signal }
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    pub fn signal(&self) -> &[bool] {
        &self.signal
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn num_signals(&self) -> usize {
        self.signal.iter().filter(|&&s| s).count()
    }
}

/// Per-hypothesis reject flags.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecisionVector {
    reject: Vec<bool>,
    rejections: usize,
}

impl DecisionVector {
    pub fn new(reject: Vec<bool>) -> Self {
        let rejections = reject.iter().filter(|&&r| r).count();
        Self { reject, rejections }
    }

    pub fn none(m: usize) -> Self {
        Self::new(vec![false; m])
    }

    pub fn reject(&self) -> &[bool] {
        &self.reject
    }

    /// Number of rejections R.
    pub fn rejections(&self) -> usize {
        self.rejections
    }

    pub fn len(&self) -> usize {
        self.reject.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reject.is_empty()
    }

    pub fn rejected_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.reject.iter().enumerate().filter(|(_, &r)| r).map(|(j, _)| j)
    }
}

/// Outcome counts of a multiple testing decision against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionTable {
    pub true_negatives: usize,
    pub false_discoveries: usize,
    pub false_negatives: usize,
    pub true_discoveries: usize,
}

impl ConfusionTable {
    pub fn rejections(&self) -> usize {
        self.false_discoveries + self.true_discoveries
    }

    pub fn nulls(&self) -> usize {
        self.true_negatives + self.false_discoveries
    }

    pub fn signals(&self) -> usize {
        self.false_negatives + self.true_discoveries
    }

    pub fn total(&self) -> usize {
        self.nulls() + self.signals()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdpSummary<T> {
    pub fdp: T,
    pub power: T,
}

pub fn confusion<T: Real>(decisions: &DecisionVector, truth: &GroundTruth<T>) -> Result<ConfusionTable> {
    if decisions.len() != truth.len() {
        return Err(Error::Dimension {
            expected: truth.len(),
            found: decisions.len(),
        });
    }
    let mut table = ConfusionTable::default();
    for (&r, &s) in decisions.reject().iter().zip(truth.signal()) {
        match (s, r) {
            (false, false) => table.true_negatives += 1,
            (false, true) => table.false_discoveries += 1,
            (true, false) => table.false_negatives += 1,
            (true, true) => table.true_discoveries += 1,
        }
    }
    Ok(table)
}

/// FDP = FD/R and power = TD/m₁, both with 0/0 = 0.
pub fn fdp_and_power<T: Real>(table: &ConfusionTable) -> FdpSummary<T> {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            T::zero()
        } else {
            T::count(num) / T::count(den)
        }
    };
    FdpSummary {
        fdp: ratio(table.false_discoveries, table.rejections()),
        power: ratio(table.true_discoveries, table.signals()),
    }
}
