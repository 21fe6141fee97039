use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conjugate::ClassIndex;
use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-9;

/// Row-stochastic `k × k` matrix: row = true class, column = predicted class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ConfusionMatrix {
    rows: Vec<Vec<f64>>,
}

impl ConfusionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::domain("confusion matrix is empty"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::domain(format!("row {i} has {} entries, expected {k}", row.len())));
            }
            if let Some(bad) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::domain(format!("row {i} entry {bad} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::domain(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(k: usize) -> Self {
        let rows = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { rows }
    }

    pub fn uniform(k: usize) -> Self {
        Self {
            rows: vec![vec![1.0 / k as f64; k]; k],
        }
    }

    /// Correct with probability `accuracy`, otherwise uniform over the other classes.
    pub fn symmetric(k: usize, accuracy: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::domain("symmetric confusion needs k >= 2"));
        }
        let off = (1.0 - accuracy) / (k - 1) as f64;
        let rows = (0..k)
            .map(|i| (0..k).map(|j| if i == j { accuracy } else { off }).collect())
            .collect();
        Self::new(rows)
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn sampler(&self) -> LabelSampler {
        let rows = self
            .rows
            .iter()
            .map(|r| WeightedIndex::new(r).expect("validated stochastic row"))
            .collect();
        LabelSampler { rows }
    }
}

impl TryFrom<Vec<Vec<f64>>> for ConfusionMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<ConfusionMatrix> for Vec<Vec<f64>> {
    fn from(c: ConfusionMatrix) -> Self {
        c.rows
    }
}

/// Precomputed per-row samplers for a [`ConfusionMatrix`].
#[derive(Debug, Clone)]
pub struct LabelSampler {
    rows: Vec<WeightedIndex<f64>>,
}

impl LabelSampler {
    pub fn sample<R: Rng + ?Sized>(&self, truth: ClassIndex, rng: &mut R) -> ClassIndex {
        ClassIndex(self.rows[truth.0].sample(rng))
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn rejects_bad_rows() {
        assert!(ConfusionMatrix::new(vec![vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(ConfusionMatrix::new(vec![vec![1.2, -0.2], vec![0.5, 0.5]]).is_err());
        assert!(ConfusionMatrix::new(vec![vec![1.0], vec![0.5, 0.5]]).is_err());
        assert!(ConfusionMatrix::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).is_ok());
    }

    #[test]
    fn identity_reproduces_truth() {
        let s = ConfusionMatrix::identity(4).sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 0..4 {
            for _ in 0..100 {
                assert_eq!(s.sample(ClassIndex(t), &mut rng), ClassIndex(t));
            }
        }
    }

    #[test]
    fn uniform_rows_are_flat() {
        let k = 3;
        let s = ConfusionMatrix::uniform(k).sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 120_000;
        let mut counts = [0usize; 3];
        for i in 0..n {
            counts[s.sample(ClassIndex(i % k), &mut rng).0] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02);
        }
    }

    #[test]
    fn serde_validates() {
        let bad: std::result::Result<ConfusionMatrix, _> = serde_json::from_str("[[0.5, 0.4], [0, 1]]");
        assert!(bad.is_err());
        let ok: ConfusionMatrix = serde_json::from_str("[[0.5, 0.5], [0, 1]]").unwrap();
        assert_eq!(ok.k(), 2);
    }
}
