use serde::{Deserialize, Serialize};

use super::categorical::CategoricalDist;
use super::dirichlet::{dirichlet_ln_pdf, DirichletParams};
use super::gaussian::{GaussianMixture, GaussianParams};
use super::nig::{nig_ln_pdf, NigParams};
use crate::error::{Error, Result};

/// Dirichlet × Π NIG prior over a k-component Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPrior {
    a: DirichletParams,
    nig: Vec<NigParams>,
}

impl ProductPrior {
    pub fn new(a: DirichletParams, nig: Vec<NigParams>) -> Result<Self> {
        if a.k() != nig.len() {
            return Err(Error::domain(format!(
                "product prior has {} weight concentrations and {} NIG components",
                a.k(),
                nig.len()
            )));
        }
        if let Some(bad) = a.alpha().iter().find(|&&x| x <= 0.0) {
            return Err(Error::domain(format!("weight concentration {bad} must be > 0")));
        }
        for n in &nig {
            n.validate()?;
        }
        Ok(Self { a, nig })
    }

    pub fn k(&self) -> usize {
        self.nig.len()
    }

    pub fn a(&self) -> &DirichletParams {
        &self.a
    }

    pub fn nig(&self) -> &[NigParams] {
        &self.nig
    }

    pub fn component(&self, i: usize) -> &NigParams {
        &self.nig[i]
    }

    pub fn with_a(&self, a: DirichletParams) -> Result<Self> {
        Self::new(a, self.nig.clone())
    }
}

/// `ln Dir(w | a) + Σᵢ ln NIG(μᵢ, σᵢ² | ·)`.
pub fn product_prior_ln_pdf(prior: &ProductPrior, theta: &GaussianMixture) -> Result<f64> {
    if theta.k() != prior.k() {
        return Err(Error::domain(format!(
            "mixture has {} components, prior {}",
            theta.k(),
            prior.k()
        )));
    }
    let w = CategoricalDist::new(theta.weights().to_vec())?;
    let mut ln = dirichlet_ln_pdf(&prior.a, &w)?;
    for (n, c) in prior.nig.iter().zip(theta.components()) {
        ln += nig_ln_pdf(n, c.mu, c.var)?;
    }
    Ok(ln)
}

pub fn product_prior_pdf(prior: &ProductPrior, theta: &GaussianMixture) -> Result<f64> {
    product_prior_ln_pdf(prior, theta).map(f64::exp)
}

/// Posterior-predictive mixture: `ŵᵢ = aᵢ/Σa`, `μ̂ᵢ = τᵢ`, `σ̂ᵢ² = γᵢ/(βᵢ−1)`.
pub fn expected_mixture(prior: &ProductPrior) -> Result<GaussianMixture> {
    let total = prior.a.total();
    let mut comps = Vec::with_capacity(prior.k());
    for (i, n) in prior.nig.iter().enumerate() {
        let var = n.mean_var().ok_or_else(|| Error::MomentUndefined {
            component: i,
            branch: None,
            reason: format!("E[sigma^2] needs beta > 1, got {}", n.beta),
        })?;
        comps.push(GaussianParams::new(n.tau, var)?);
    }
    let weights = prior.a.alpha().iter().map(|a| a / total).collect();
    GaussianMixture::new(weights, comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugate::{dirichlet_ln_pdf, nig_ln_pdf};

    fn nig(t: f64, k: f64, b: f64, g: f64) -> NigParams {
        NigParams::new(t, k, b, g).unwrap()
    }

    #[test]
    fn single_component_reduces_to_nig() {
        let prior = ProductPrior::new(DirichletParams::uniform(1), vec![nig(0.2, 2.0, 3.0, 1.0)]).unwrap();
        let theta = GaussianMixture::single(GaussianParams::new(0.4, 0.7).unwrap());
        let ln = product_prior_ln_pdf(&prior, &theta).unwrap();
        let expected = nig_ln_pdf(prior.component(0), 0.4, 0.7).unwrap();
        assert!((ln - expected).abs() < 1e-14);
    }

    #[test]
    fn log_density_factorises() {
        let a = DirichletParams::new(vec![2.0, 3.5]).unwrap();
        let comps = vec![nig(0.0, 1.0, 3.0, 2.0), nig(1.0, 0.5, 4.0, 1.0)];
        let prior = ProductPrior::new(a.clone(), comps.clone()).unwrap();
        let theta = GaussianMixture::new(
            vec![0.3, 0.7],
            vec![GaussianParams::new(0.1, 0.5).unwrap(), GaussianParams::new(0.9, 0.2).unwrap()],
        )
        .unwrap();
        let w = CategoricalDist::new(vec![0.3, 0.7]).unwrap();
        let expected = dirichlet_ln_pdf(&a, &w).unwrap()
            + nig_ln_pdf(&comps[0], 0.1, 0.5).unwrap()
            + nig_ln_pdf(&comps[1], 0.9, 0.2).unwrap();
        assert_eq!(product_prior_ln_pdf(&prior, &theta).unwrap(), expected);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(ProductPrior::new(DirichletParams::uniform(2), vec![nig(0.0, 1.0, 3.0, 1.0)]).is_err());
        let prior = ProductPrior::new(DirichletParams::uniform(1), vec![nig(0.0, 1.0, 3.0, 1.0)]).unwrap();
        let theta = GaussianMixture::new(
            vec![0.5, 0.5],
            vec![GaussianParams::new(0.0, 1.0).unwrap(); 2],
        )
        .unwrap();
        assert!(product_prior_pdf(&prior, &theta).is_err());
    }

    #[test]
    fn expected_mixture_uses_inverse_gamma_mean() {
        let prior = ProductPrior::new(
            DirichletParams::uniform(2),
            vec![nig(0.0, 1.0, 3.0, 2.0), nig(0.0, 1.0, 3.0, 2.0)],
        )
        .unwrap();
        let m = expected_mixture(&prior).unwrap();
        assert_eq!(m.weights(), &[0.5, 0.5]);
        for c in m.components() {
            assert_eq!(c.mu, 0.0);
            assert!((c.var - 1.0).abs() < 1e-15);
        }

        let single = ProductPrior::new(DirichletParams::new(vec![3.0]).unwrap(), vec![nig(0.7, 1.0, 3.0, 2.0)]).unwrap();
        let m = expected_mixture(&single).unwrap();
        assert_eq!(m.weights(), &[1.0]);
        assert_eq!(m.components()[0].mu, 0.7);

        let near = ProductPrior::new(DirichletParams::uniform(1), vec![nig(0.0, 1.0, 1.0001, 1.0)]).unwrap();
        let v = expected_mixture(&near).unwrap().components()[0].var;
        assert!((v - 1e4).abs() < 1e-6 * 1e4);

        let bad = ProductPrior::new(
            DirichletParams::uniform(2),
            vec![nig(0.0, 1.0, 3.0, 2.0), nig(0.0, 1.0, 0.9, 2.0)],
        )
        .unwrap();
        match expected_mixture(&bad) {
            Err(Error::MomentUndefined { component, .. }) => assert_eq!(component, 1),
            other => panic!("expected moment-undefined error, got {other:?}"),
        }
    }
}
