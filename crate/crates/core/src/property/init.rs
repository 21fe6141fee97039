use serde::{Deserialize, Serialize};

use super::table::PropertyTable;
use crate::conjugate::{
    argmax, predictive_class, ClassIndex, DirichletParams, GaussianMixture, NigParams, ProductPrior,
};
use crate::error::{Error, Result};
use crate::moments::BetaFloor;
use crate::special::ln_normal_pdf;

/// Default `C` in `γ = √β / C`.
pub const DEFAULT_C_CONST: f64 = 40.0;

/// Mixture `Σ (αᵢ/Σα) N(ψ | μᵢ, σᵢ²)` over the table's classes.
pub fn build_likelihood(alpha: &DirichletParams, table: &PropertyTable) -> Result<GaussianMixture> {
    if alpha.k() != table.len() {
        return Err(Error::domain(format!(
            "belief has {} classes, table {}",
            alpha.k(),
            table.len()
        )));
    }
    let weights = predictive_class(alpha)?;
    let comps = table.entries().iter().map(|e| e.params).collect();
    GaussianMixture::new(weights.probs().to_vec(), comps)
}

/// Class whose Gaussian assigns `ψ` the highest density; ties go to the
/// lowest index.
pub fn nearest_class(psi: f64, table: &PropertyTable) -> ClassIndex {
    let scores: Vec<f64> = table
        .entries()
        .iter()
        .map(|e| ln_normal_pdf(psi, e.params.mu, e.params.var))
        .collect();
    ClassIndex(argmax(&scores))
}

/// How a table row becomes an NIG component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitPolicy {
    /// `τ = μ`, `κ = 1`, `β = σ²/τ`, `γ = √β / c_const`, then floored with
    /// `E[σ²] = σ²` preserved. Requires `μ > 0`.
    Table { c_const: f64 },
    /// `τ = μ`, `κ = 1`, `β = 2 + ε`, `γ = σ²(1 + ε)`. Works for any sign of μ.
    MomentPreserving,
}

impl Default for InitPolicy {
    fn default() -> Self {
        Self::Table {
            c_const: DEFAULT_C_CONST,
        }
    }
}

/// Initial prior with the pre-floor components kept for inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitializedPrior {
    pub prior: ProductPrior,
    pub raw: Vec<NigParams>,
    pub clamped: Vec<bool>,
}

impl InitializedPrior {
    pub fn clamp_count(&self) -> usize {
        self.clamped.iter().filter(|&&c| c).count()
    }
}

pub fn init_product_prior(alpha: &DirichletParams, table: &PropertyTable, c_const: f64) -> Result<InitializedPrior> {
    init_with_policy(alpha, table, InitPolicy::Table { c_const }, &BetaFloor::default())
}

pub fn init_with_policy(
    alpha: &DirichletParams,
    table: &PropertyTable,
    policy: InitPolicy,
    floor: &BetaFloor,
) -> Result<InitializedPrior> {
    if alpha.k() != table.len() {
        return Err(Error::domain(format!(
            "belief has {} classes, table {}",
            alpha.k(),
            table.len()
        )));
    }
    let mut raw = Vec::with_capacity(table.len());
    let mut nig = Vec::with_capacity(table.len());
    let mut clamped = Vec::with_capacity(table.len());
    for e in table.entries() {
        let (mu, var) = (e.params.mu, e.params.var);
        let r = match policy {
            InitPolicy::Table { c_const } => {
                if !(c_const > 0.0 && c_const.is_finite()) {
                    return Err(Error::domain(format!("C = {c_const} must be positive")));
                }
                if !(mu > 0.0) {
                    return Err(Error::Init {
                        class: e.class.clone(),
                        reason: format!("beta = sigma^2 / tau is undefined for tau = {mu}"),
                    });
                }
                let beta = var / mu;
                NigParams::new(mu, 1.0, beta, beta.sqrt() / c_const).map_err(|err| Error::Init {
                    class: e.class.clone(),
                    reason: err.to_string(),
                })?
            }
            InitPolicy::MomentPreserving => {
                let beta = floor.min_beta();
                NigParams::new(mu, 1.0, beta, var * (beta - 1.0))?
            }
        };
        let floored = floor.clamp(&r, var);
        clamped.push(floored.is_some());
        nig.push(floored.unwrap_or(r));
        raw.push(r);
    }
    let positive = DirichletParams::new(alpha.alpha().to_vec())?;
    Ok(InitializedPrior {
        prior: ProductPrior::new(positive, nig)?,
        raw,
        clamped,
    })
}
