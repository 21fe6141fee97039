use serde::{Deserialize, Serialize};

use super::ClassIndex;
use crate::error::{Error, Result};

/// Simplex tolerance: inputs whose sum is within this of 1 are renormalised,
/// anything further off is rejected.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Probability vector over `k` classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CategoricalDist {
    theta: Vec<f64>,
}

impl CategoricalDist {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::domain("categorical distribution needs at least one class"));
        }
        if let Some(bad) = theta.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::domain(format!("probability {bad} outside [0, 1]")));
        }
        let sum: f64 = theta.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::domain(format!(
                "probabilities sum to {sum}, not 1 (tolerance {SIMPLEX_TOLERANCE:e})"
            )));
        }
        let theta = if sum == 1.0 {
            theta
        } else {
            theta.into_iter().map(|t| t / sum).collect()
        };
        Ok(Self { theta })
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            theta: vec![1.0 / k as f64; k],
        }
    }

    pub(crate) fn from_normalized_unchecked(theta: Vec<f64>) -> Self {
        Self { theta }
    }

    pub fn k(&self) -> usize {
        self.theta.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.theta
    }

    /// Most probable class, lowest index on ties.
    pub fn argmax(&self) -> ClassIndex {
        ClassIndex(super::argmax(&self.theta))
    }
}

impl TryFrom<Vec<f64>> for CategoricalDist {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CategoricalDist> for Vec<f64> {
    fn from(c: CategoricalDist) -> Self {
        c.theta
    }
}

/// `p(z = i | θ) = θᵢ`.
pub fn categorical_pmf(theta: &CategoricalDist, i: ClassIndex) -> Result<f64> {
    theta
        .theta
        .get(i.0)
        .copied()
        .ok_or_else(|| Error::domain(format!("class {i} out of range 1..={}", theta.k())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(i: usize) -> ClassIndex {
        ClassIndex::from_one_based(i).unwrap()
    }

    #[test]
    fn pmf_is_a_lookup() {
        let t = CategoricalDist::new(vec![0.2, 0.8]).unwrap();
        assert_eq!(categorical_pmf(&t, one(2)).unwrap(), 0.8);
        let t = CategoricalDist::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(categorical_pmf(&t, one(2)).unwrap(), 0.0);
        let t = CategoricalDist::new(vec![1.0 / 3.0; 3]).unwrap();
        assert!((categorical_pmf(&t, one(1)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let t = CategoricalDist::new(vec![0.2, 0.8]).unwrap();
        assert!(categorical_pmf(&t, one(3)).is_err());
    }

    #[test]
    fn near_simplex_inputs_are_renormalised() {
        let t = CategoricalDist::new(vec![0.5, 0.5 + 5e-13]).unwrap();
        let s: f64 = t.probs().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert!(CategoricalDist::new(vec![0.5, 0.5 + 1e-9]).is_err());
        assert!(CategoricalDist::new(vec![1.1, -0.1]).is_err());
        assert!(CategoricalDist::new(vec![]).is_err());
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        let t = CategoricalDist::new(vec![0.4, 0.4, 0.2]).unwrap();
        assert_eq!(t.argmax(), ClassIndex(0));
    }
}
