use rand::Rng;
use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::Scalar;

/// Opinions of all agents at one epoch, each in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionState<T> {
    values: Vec<T>,
    epoch: u64,
}

impl<T: Scalar> OpinionState<T> {
    pub fn new(values: Vec<T>, epoch: u64) -> Result<Self, DynamicsError> {
        let one = T::one();
        for (index, &v) in values.iter().enumerate() {
            if !(v >= -one && v <= one) {
                return Err(DynamicsError::OpinionOutOfRange {
                    index,
                    value: v.as_f64(),
                });
            }
        }
        Ok(Self { values, epoch })
    }

    /// i.i.d. uniform opinions on `[-1, 1]` at epoch 0.
    pub fn uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let values = (0..n)
            .map(|_| T::from_f64_lossy(rng.random_range(-1.0..=1.0)))
            .collect();
        Self { values, epoch: 0 }
    }

    /// Successor state from values produced by a step; averages of in-range
    /// values stay in range, so no re-validation.
    pub(crate) fn successor(&self, values: Vec<T>) -> Self {
        Self {
            values,
            epoch: self.epoch + 1,
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<T> {
        self.values.get(i).copied()
    }

    pub fn mean(&self) -> T {
        let sum = self.values.iter().fold(T::zero(), |acc, &v| acc + v);
        sum / T::from_usize_lossy(self.values.len())
    }

    /// `max - min` over agents.
    pub fn spread(&self) -> T {
        let (lo, hi) = self
            .values
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    }

    /// Values rescaled onto the agents' `[-5, 5]` working scale.
    pub fn scaled(&self) -> Vec<T> {
        let five = T::from_f64_lossy(5.0);
        self.values.iter().map(|&v| v * five).collect()
    }
}
