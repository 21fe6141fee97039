use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_gamma, LN_2PI};

/// Normal-Inverse-Gamma hyperparameters `(τ, κ, β, γ)`.
///
/// The density is
///
/// ```text
/// √κ / √(2πσ²) · γ^β / Γ(β) · (1/σ²)^(β+1) · exp(−(2γ + κ(μ−τ)²) / (2σ²))
/// ```
///
/// i.e. `μ | σ² ~ N(τ, σ²/κ)` and `σ² ~ InvGamma(shape β, scale γ)`. All
/// moment identities in the crate use this parameterisation:
///
/// * `E[μ] = τ`
/// * `E[σ²] = γ/(β−1)` for β > 1
/// * `E[σ⁴] = γ²/((β−1)(β−2))` for β > 2
/// * `E[μ²σ²] = τ²E[σ²] + E[σ⁴]/κ`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigParams {
    pub tau: f64,
    pub kappa: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl NigParams {
    pub fn new(tau: f64, kappa: f64, beta: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            tau,
            kappa,
            beta,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tau.is_finite() {
            return Err(Error::domain(format!("NIG tau {} is not finite", self.tau)));
        }
        for (name, v) in [("kappa", self.kappa), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("NIG {name} = {v} must be finite and > 0")));
            }
        }
        Ok(())
    }

    /// `E[σ²]`, defined for β > 1.
    pub fn mean_var(&self) -> Option<f64> {
        (self.beta > 1.0).then(|| self.gamma / (self.beta - 1.0))
    }

    /// `E[σ⁴]`, defined for β > 2.
    pub fn mean_var_sq(&self) -> Option<f64> {
        (self.beta > 2.0)
            .then(|| self.gamma * self.gamma / ((self.beta - 1.0) * (self.beta - 2.0)))
    }

    /// `E[μ²σ²]`, defined for β > 2.
    pub fn mean_mu_sq_var(&self) -> Option<f64> {
        let ev = self.mean_var()?;
        let ev2 = self.mean_var_sq()?;
        Some(self.tau * self.tau * ev + ev2 / self.kappa)
    }
}

/// Log density of the NIG at `(μ, σ²)`.
pub fn nig_ln_pdf(p: &NigParams, mu: f64, var: f64) -> Result<f64> {
    if !(var > 0.0) {
        return Err(Error::domain(format!("variance {var} must be positive")));
    }
    let ln_var = var.ln();
    let d = mu - p.tau;
    Ok(0.5 * p.kappa.ln() - 0.5 * (LN_2PI + ln_var) + p.beta * p.gamma.ln()
        - ln_gamma(p.beta)
        - (p.beta + 1.0) * ln_var
        - (2.0 * p.gamma + p.kappa * d * d) / (2.0 * var))
}

pub fn nig_pdf(p: &NigParams, mu: f64, var: f64) -> Result<f64> {
    nig_ln_pdf(p, mu, var).map(f64::exp)
}
