use serde::{Deserialize, Serialize};

/// What a [`WeightVector`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// l1 Lewis weights, summing to the rank.
    Lewis,
    /// l2 leverage scores, summing to the rank.
    Leverage,
    /// Sampling values `p_i`, summing to the draw budget.
    Sampling,
}

/// Per-row nonnegative importance scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub kind: WeightKind,
    pub values: Vec<f64>,
}

impl WeightVector {
    pub fn new(kind: WeightKind, values: Vec<f64>) -> Self {
        WeightVector { kind, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        crate::linalg::compensated_sum(self.values.iter().copied())
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}
