//! Short-term-memory and parity-check capacities.
//!
//! For a delay `d` the readout is trained to reproduce either `x_{k−d}`
//! (memory) or `(Σ_{i=0}^{d} x_{k−i}) mod 2` (parity) from the features at
//! step `k`. The capacity at `d` is the squared Pearson correlation between
//! held-out predictions and targets, and the total capacity is the sum over
//! delays.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::regression::{pseudoinverse, squared_correlation, DesignMatrix, DEFAULT_RCOND};
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityTask {
    ShortTermMemory,
    Parity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    /// Fair coin flips in `{0, 1}`.
    Binary,
    /// Uniform on `[0, 1)`.
    Uniform,
}

/// I.i.d. driving inputs.
pub fn random_inputs(len: usize, kind: InputKind, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..len)
        .map(|_| match kind {
            InputKind::Binary => f64::from(u8::from(rng.random::<bool>())),
            InputKind::Uniform => rng.random::<f64>(),
        })
        .collect()
}

/// Row ranges for washout, training and held-out evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapacitySplit {
    pub washout: usize,
    pub train: usize,
    pub test: usize,
}

impl CapacitySplit {
    pub fn total(&self) -> usize {
        self.washout + self.train + self.test
    }
}

/// Per-delay capacities.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityProfile {
    /// `capacities[d]` for `d = 0..=max_delay`.
    pub capacities: Vec<f64>,
    /// Delays whose targets or predictions had zero variance; their capacity is 0.
    pub degenerate: Vec<usize>,
}

impl CapacityProfile {
    pub fn total(&self) -> f64 {
        self.capacities.iter().sum()
    }
}

/// Target `ȳ_k` for delay `d`; `None` while `k < d`.
pub fn capacity_target(task: CapacityTask, inputs: &[f64], k: usize, d: usize) -> Option<f64> {
    if k < d {
        return None;
    }
    Some(match task {
        CapacityTask::ShortTermMemory => inputs[k - d],
        CapacityTask::Parity => {
            let ones: usize = (0..=d).map(|i| usize::from(inputs[k - i] > 0.5)).sum();
            (ones % 2) as f64
        }
    })
}

/// Capacity at every delay `0..=max_delay` for features aligned with
/// `inputs` (row `k` produced after consuming `inputs[k]`).
///
/// The washout must cover `max_delay` so every training and test row has a
/// defined target.
pub fn capacity_profile(
    features: &DMatrix<f64>,
    inputs: &[f64],
    task: CapacityTask,
    max_delay: usize,
    split: CapacitySplit,
) -> Result<CapacityProfile> {
    if features.nrows() != inputs.len() {
        return Err(Error::DimensionMismatch { expected: inputs.len(), found: features.nrows() });
    }
    if split.total() > inputs.len() {
        return Err(Error::InsufficientHistory { needed: split.total(), got: inputs.len() });
    }
    if split.washout < max_delay {
        return Err(Error::invalid("washout must cover the largest delay"));
    }
    if split.train == 0 || split.test == 0 {
        return Err(Error::Empty("capacity split"));
    }
    if task == CapacityTask::Parity && inputs.iter().any(|&x| x != 0.0 && x != 1.0) {
        return Err(Error::invalid("parity capacity needs binary inputs"));
    }
    let train_start = split.washout;
    let test_start = train_start + split.train;
    let test_end = test_start + split.test;
    let x_train = DesignMatrix::new(features.rows(train_start, split.train).into_owned())?;
    // one factorization serves every delay
    let pinv = pseudoinverse(x_train.as_matrix(), DEFAULT_RCOND)?;
    let x_test = features.rows(test_start, split.test).into_owned();
    let target = |k: usize, d: usize| capacity_target(task, inputs, k, d).unwrap_or(0.0);
    let mut capacities = Vec::with_capacity(max_delay + 1);
    let mut degenerate = Vec::new();
    for d in 0..=max_delay {
        let y_train = DVector::from_iterator(split.train, (train_start..test_start).map(|k| target(k, d)));
        let y_test: Vec<f64> = (test_start..test_end).map(|k| target(k, d)).collect();
        let pred: Vec<f64> = (&x_test * (&pinv * y_train)).iter().copied().collect();
        match squared_correlation(&pred, &y_test)? {
            Some(c) => capacities.push(c),
            None => {
                capacities.push(0.0);
                degenerate.push(d);
            }
        }
    }
    Ok(CapacityProfile { capacities, degenerate })
}

/// Memoryless baseline features `[x_k, 1]`.
pub fn linear_baseline_features(inputs: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(inputs.len(), 2, |k, c| if c == 0 { inputs[k] } else { 1.0 })
}
