use serde::{Deserialize, Serialize};

use super::sufficient::{ComponentMoments, SufficientMoments};
use crate::conjugate::{DirichletParams, NigParams, ProductPrior};
use crate::error::{Error, Result};

/// Denominators at or below this value are treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-300;

/// Which inversion maps sufficient moments back to hyperparameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    /// `β̂ = E[σ²]²/V`, `γ̂ = E[σ²]/V`, `κ̂ = 1/D` with
    /// `V = E[σ⁴] − E[σ²]²` and `D = E[μ²σ²] − E[μ]²E[σ²]`.
    ///
    /// These are Gamma shape/rate matches, so they do not invert the NIG
    /// moment identities used elsewhere; a pure NIG comes back with
    /// `β̂ = β − 2`.
    #[default]
    Paper,
    /// Exact inverse of the NIG identities: `β̂ = E[σ²]²/V + 2`,
    /// `γ̂ = E[σ²](β̂ − 1)`, `κ̂ = E[σ⁴]/D`.
    Corrected,
}

impl std::str::FromStr for ProjectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "corrected" => Ok(Self::Corrected),
            other => Err(Error::domain(format!(
                "unknown projection mode `{other}` (expected paper or corrected)"
            ))),
        }
    }
}

impl std::fmt::Display for ProjectionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Corrected => "corrected",
        })
    }
}

fn denominator(component: usize, quantity: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > SINGULAR_THRESHOLD {
        Ok(value)
    } else {
        Err(Error::SingularProjection {
            component,
            quantity,
            value,
        })
    }
}

fn positive(component: usize, name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            component,
            name,
            value,
        })
    }
}

/// Projects one component's NIG moments.
pub(crate) fn project_nig(i: usize, m: &ComponentMoments, mode: ProjectionMode) -> Result<NigParams> {
    let var_spread = denominator(i, "E[sigma^4] - E[sigma^2]^2", m.e_var2 - m.e_var * m.e_var)?;
    let kappa_den = denominator(i, "E[mu^2 sigma^2] - E[mu]^2 E[sigma^2]", m.e_mu2var - m.e_mu * m.e_mu * m.e_var)?;
    let ratio = m.e_var * m.e_var / var_spread;
    let (kappa, beta, gamma) = match mode {
        ProjectionMode::Paper => (1.0 / kappa_den, ratio, m.e_var / var_spread),
        ProjectionMode::Corrected => {
            let beta = ratio + 2.0;
            (m.e_var2 / kappa_den, beta, m.e_var * (beta - 1.0))
        }
    };
    if !m.e_mu.is_finite() {
        return Err(Error::InvalidParameter {
            component: i,
            name: "tau",
            value: m.e_mu,
        });
    }
    Ok(NigParams {
        tau: m.e_mu,
        kappa: positive(i, "kappa", kappa)?,
        beta: positive(i, "beta", beta)?,
        gamma: positive(i, "gamma", gamma)?,
    })
}

/// Projects one component's weight moments to a Dirichlet concentration.
pub(crate) fn project_weight(i: usize, m: &ComponentMoments) -> Result<f64> {
    let den = denominator(i, "E[w^2] - E[w]^2", m.e_w2 - m.e_w * m.e_w)?;
    positive(i, "a", m.e_w * (m.e_w - m.e_w2) / den)
}

/// Method-of-moments projection onto the Dirichlet NIG product family.
pub fn match_moments(m: &SufficientMoments, mode: ProjectionMode) -> Result<ProductPrior> {
    let mut a = Vec::with_capacity(m.k());
    let mut nig = Vec::with_capacity(m.k());
    for (i, c) in m.components.iter().enumerate() {
        nig.push(project_nig(i, c, mode)?);
        a.push(project_weight(i, c)?);
    }
    ProductPrior::new(DirichletParams::new(a)?, nig)
}

/// Moments a prior represents under the moment map that `mode` inverts.
///
/// `Corrected` uses the NIG identities. `Paper` uses the Gamma shape/rate
/// reading of `(β, γ)`: `E[σ²] = β/γ`, `E[σ⁴] = (β + β²)/γ²`,
/// `E[μ²σ²] = 1/κ + τ²β/γ`. Weight moments are the Dirichlet ones in both.
pub fn implied_moments(prior: &ProductPrior, mode: ProjectionMode) -> Result<SufficientMoments> {
    let a = prior.a();
    let a0 = a.total();
    let mut components = Vec::with_capacity(prior.k());
    for (i, (n, &ai)) in prior.nig().iter().zip(a.alpha()).enumerate() {
        let (e_var, e_var2, e_mu2var) = match mode {
            ProjectionMode::Paper => {
                let v = n.beta / n.gamma;
                (v, (n.beta + n.beta * n.beta) / (n.gamma * n.gamma), 1.0 / n.kappa + n.tau * n.tau * v)
            }
            ProjectionMode::Corrected => match (n.mean_var(), n.mean_var_sq(), n.mean_mu_sq_var()) {
                (Some(v), Some(v2), Some(mv)) => (v, v2, mv),
                _ => {
                    return Err(Error::MomentUndefined {
                        component: i,
                        branch: None,
                        reason: format!("E[sigma^4] needs beta > 2, got {}", n.beta),
                    })
                }
            },
        };
        components.push(ComponentMoments {
            e_mu: n.tau,
            e_var,
            e_var2,
            e_mu2var,
            e_w: ai / a0,
            e_w2: ai * (ai + 1.0) / (a0 * (a0 + 1.0)),
        });
    }
    Ok(SufficientMoments { components })
}
