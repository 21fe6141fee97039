use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::conjugate::{CategoricalDist, DirichletParams};
use crate::error::{Error, Result};

/// Smallest sample count accepted by the Monte-Carlo predictive.
pub const MC_MIN_SAMPLES: usize = 10_000;

/// Monte-Carlo estimate of `E[θ]` under `Dir(α)` with per-class standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: CategoricalDist,
    pub std_error: Vec<f64>,
}

/// Draws θ by normalising independent `Gamma(αᵢ, 1)` variates from a
/// ChaCha8 stream seeded with `seed`.
pub fn mc_predictive_with_error(alpha: &DirichletParams, n: usize, seed: u64) -> Result<McEstimate> {
    if n < MC_MIN_SAMPLES {
        return Err(Error::domain(format!("Monte-Carlo predictive needs n >= {MC_MIN_SAMPLES}, got {n}")));
    }
    let gammas = alpha
        .alpha()
        .iter()
        .map(|&a| Gamma::new(a, 1.0).map_err(|e| Error::domain(format!("Gamma({a}, 1): {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let k = gammas.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; k];
    let mut sum_sq = vec![0.0; k];
    let mut draw = vec![0.0; k];
    for _ in 0..n {
        let mut total = 0.0;
        for (d, g) in draw.iter_mut().zip(&gammas) {
            *d = g.sample(&mut rng);
            total += *d;
        }
        for i in 0..k {
            let t = draw[i] / total;
            sum[i] += t;
            sum_sq[i] += t * t;
        }
    }
    let nf = n as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let std_error = mean
        .iter()
        .zip(&sum_sq)
        .map(|(m, s2)| ((s2 / nf - m * m).max(0.0) * nf / (nf - 1.0) / nf).sqrt())
        .collect();
    Ok(McEstimate {
        mean: CategoricalDist::new(mean)?,
        std_error,
    })
}

pub fn mc_predictive(alpha: &DirichletParams, n: usize, seed: u64) -> Result<CategoricalDist> {
    mc_predictive_with_error(alpha, n, seed).map(|e| e.mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = DirichletParams::new(vec![3.0, 2.0, 1.0]).unwrap();
        assert_eq!(mc_predictive(&a, 20_000, 5).unwrap(), mc_predictive(&a, 20_000, 5).unwrap());
        assert_ne!(mc_predictive(&a, 20_000, 5).unwrap(), mc_predictive(&a, 20_000, 6).unwrap());
    }

    #[test]
    fn symmetric_alpha_gives_symmetric_estimate() {
        let est = mc_predictive_with_error(&DirichletParams::new(vec![2.0; 3]).unwrap(), 100_000, 1).unwrap();
        for (p, se) in est.mean.probs().iter().zip(&est.std_error) {
            assert!((p - 1.0 / 3.0).abs() < 4.0 * se);
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(mc_predictive(&DirichletParams::uniform(2), 100, 0).is_err());
    }
}
