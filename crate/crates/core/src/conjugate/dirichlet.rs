use serde::{Deserialize, Serialize};

use super::categorical::CategoricalDist;
use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// Dirichlet concentration vector.
///
/// Entries may be zero (a class that has never been observed under a
/// zero-initialised prior) but at least one must be positive. Densities
/// additionally require every entry to be positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::domain("Dirichlet needs at least one class"));
        }
        if let Some(bad) = alpha.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::domain(format!("concentration {bad} must be finite and >= 0")));
        }
        if !alpha.iter().any(|&a| a > 0.0) {
            return Err(Error::domain("at least one concentration must be positive"));
        }
        Ok(Self { alpha })
    }

    /// `α = 1ₖ`, the map's initial belief.
    pub fn uniform(k: usize) -> Self {
        Self { alpha: vec![1.0; k] }
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn total(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// Copy with entry `j` incremented by `by`.
    pub fn incremented(&self, j: usize, by: f64) -> Self {
        let mut alpha = self.alpha.clone();
        alpha[j] += by;
        Self { alpha }
    }
}

impl TryFrom<Vec<f64>> for DirichletParams {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DirichletParams> for Vec<f64> {
    fn from(d: DirichletParams) -> Self {
        d.alpha
    }
}

/// Log density of `Dir(θ | α)`.
pub fn dirichlet_ln_pdf(alpha: &DirichletParams, theta: &CategoricalDist) -> Result<f64> {
    if alpha.k() != theta.k() {
        return Err(Error::domain(format!(
            "dimension mismatch: alpha has {} entries, theta {}",
            alpha.k(),
            theta.k()
        )));
    }
    if alpha.alpha.iter().any(|&a| a <= 0.0) {
        return Err(Error::domain("Dirichlet density needs every concentration > 0"));
    }
    let on_boundary = theta.probs().iter().any(|&t| t == 0.0);
    if on_boundary && alpha.alpha.iter().any(|&a| a < 1.0) {
        return Err(Error::domain(
            "theta on the simplex boundary while some concentration < 1 (unbounded density)",
        ));
    }
    let mut ln = ln_gamma(alpha.total());
    for (&a, &t) in alpha.alpha.iter().zip(theta.probs()) {
        ln -= ln_gamma(a);
        if a != 1.0 {
            // t == 0 with a > 1 gives -inf, i.e. zero density.
            ln += (a - 1.0) * t.ln();
        }
    }
    Ok(ln)
}

pub fn dirichlet_pdf(alpha: &DirichletParams, theta: &CategoricalDist) -> Result<f64> {
    dirichlet_ln_pdf(alpha, theta).map(f64::exp)
}

/// Conjugate update: `α̃ⱼ = αⱼ + countsⱼ`.
pub fn dirichlet_update(alpha: &DirichletParams, counts: &[u64]) -> Result<DirichletParams> {
    if counts.len() != alpha.k() {
        return Err(Error::domain(format!(
            "counts have {} entries, expected {}",
            counts.len(),
            alpha.k()
        )));
    }
    let alpha = alpha
        .alpha
        .iter()
        .zip(counts)
        .map(|(&a, &c)| a + c as f64)
        .collect();
    Ok(DirichletParams { alpha })
}

/// Posterior predictive `p(z = i | α) = αᵢ / Σα`.
pub fn predictive_class(alpha: &DirichletParams) -> Result<CategoricalDist> {
    let total = alpha.total();
    if !(total > 0.0) {
        return Err(Error::domain("predictive class needs a positive total concentration"));
    }
    let theta = alpha.alpha.iter().map(|a| a / total).collect();
    Ok(CategoricalDist::from_normalized_unchecked(theta))
}
