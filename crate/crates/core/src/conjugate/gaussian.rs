use serde::{Deserialize, Serialize};

use super::categorical::SIMPLEX_TOLERANCE;
use crate::error::{Error, Result};
use crate::special::normal_pdf;

/// Mean and variance of one class-conditional property Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mu: f64,
    pub var: f64,
}

impl GaussianParams {
    pub fn new(mu: f64, var: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::domain(format!("Gaussian mean {mu} is not finite")));
        }
        if !(var.is_finite() && var > 0.0) {
            return Err(Error::domain(format!("Gaussian variance {var} must be positive")));
        }
        Ok(Self { mu, var })
    }

    pub fn from_mean_sd(mu: f64, sd: f64) -> Result<Self> {
        Self::new(mu, sd * sd)
    }

    pub fn sd(&self) -> f64 {
        self.var.sqrt()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        normal_pdf(x, self.mu, self.var)
    }
}

/// `p(ψ | Θ) = Σ wᵢ N(ψ | μᵢ, σᵢ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    components: Vec<GaussianParams>,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, components: Vec<GaussianParams>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::domain(format!(
                "mixture has {} weights and {} components",
                weights.len(),
                components.len()
            )));
        }
        if let Some(bad) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::domain(format!("mixture weight {bad} outside [0, 1]")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::domain(format!("mixture weights sum to {sum}")));
        }
        let weights = if sum == 1.0 {
            weights
        } else {
            weights.into_iter().map(|w| w / sum).collect()
        };
        Ok(Self {
            weights,
            components,
        })
    }

    pub fn single(component: GaussianParams) -> Self {
        Self {
            weights: vec![1.0],
            components: vec![component],
        }
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[GaussianParams] {
        &self.components
    }

    /// `E[ψ] = Σ wᵢ μᵢ`.
    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * c.mu)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * (c.var + (c.mu - m).powi(2)))
            .sum()
    }

    pub fn pdf(&self, psi: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * c.pdf(psi))
            .sum()
    }
}

pub fn mixture_pdf(m: &GaussianMixture, psi: f64) -> f64 {
    m.pdf(psi)
}
