use serde::{Deserialize, Serialize};

use crate::conjugate::{ClassIndex, DirichletParams, NigParams, ProductPrior};
use crate::error::{Error, Result};
use crate::special::{ln_gamma, log_sum_exp, LN_2PI};

/// How branch responsibilities are formed from the branch constants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchWeighting {
    /// `rⱼ ∝ (aⱼ/Σa)·cⱼ`, the exact Bayes posterior under the Dirichlet prior.
    #[default]
    PriorWeighted,
    /// `rⱼ ∝ cⱼ`, ignoring the weight prior.
    Unweighted,
}

/// One summand of the exact posterior: the measurement is attributed to
/// component `updated_index`, whose NIG takes one conjugate step while every
/// other component keeps its prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorBranch {
    pub updated_index: ClassIndex,
    /// Log of the branch constant
    /// `cⱼ = √(κ/κ̃) · Γ(β̃)/Γ(β) · γ^β / γ̃^β̃`.
    pub log_c: f64,
    /// Unnormalised log responsibility: `log_c` plus the prior weight term
    /// when weighting is enabled.
    pub log_weight: f64,
    pub a_tilde: DirichletParams,
    pub nig_tilde: NigParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactPosterior {
    pub prior: ProductPrior,
    pub psi: f64,
    pub weighting: BranchWeighting,
    pub branches: Vec<PosteriorBranch>,
    /// `logsumexp` of the branch log weights.
    pub log_m: f64,
}

impl ExactPosterior {
    pub fn k(&self) -> usize {
        self.branches.len()
    }

    /// Log marginal density of the measurement, `ln p(ψ | Ψ)`.
    ///
    /// Only meaningful with [`BranchWeighting::PriorWeighted`].
    pub fn log_evidence(&self) -> f64 {
        self.log_m - 0.5 * LN_2PI
    }
}

/// Conjugate NIG step for a single observation `ψ`.
pub(crate) fn nig_step(p: &NigParams, psi: f64) -> NigParams {
    let kappa_t = p.kappa + 1.0;
    let d = psi - p.tau;
    NigParams {
        // (κτ + ψ)/(κ + 1), written so that ψ = τ returns τ exactly
        tau: p.tau + d / kappa_t,
        kappa: kappa_t,
        beta: p.beta + 0.5,
        gamma: p.gamma + p.kappa * d * d / (2.0 * kappa_t),
    }
}

fn log_branch_constant(prior: &NigParams, post: &NigParams) -> f64 {
    0.5 * (prior.kappa / post.kappa).ln() + ln_gamma(post.beta) - ln_gamma(prior.beta)
        + prior.beta * prior.gamma.ln()
        - post.beta * post.gamma.ln()
}

pub fn exact_posterior(prior: &ProductPrior, psi: f64) -> Result<ExactPosterior> {
    exact_posterior_with(prior, psi, BranchWeighting::default())
}

pub fn exact_posterior_with(
    prior: &ProductPrior,
    psi: f64,
    weighting: BranchWeighting,
) -> Result<ExactPosterior> {
    if !psi.is_finite() {
        return Err(Error::domain(format!("measurement {psi} is not finite")));
    }
    let a = prior.a();
    let ln_total = a.total().ln();
    let branches: Vec<PosteriorBranch> = prior
        .nig()
        .iter()
        .enumerate()
        .map(|(j, nig)| {
            let nig_tilde = nig_step(nig, psi);
            let log_c = log_branch_constant(nig, &nig_tilde);
            let log_weight = match weighting {
                BranchWeighting::PriorWeighted => log_c + a.alpha()[j].ln() - ln_total,
                BranchWeighting::Unweighted => log_c,
            };
            PosteriorBranch {
                updated_index: ClassIndex(j),
                log_c,
                log_weight,
                a_tilde: a.incremented(j, 1.0),
                nig_tilde,
            }
        })
        .collect();
    let log_weights: Vec<f64> = branches.iter().map(|b| b.log_weight).collect();
    let log_m = log_sum_exp(&log_weights);
    if !log_m.is_finite() {
        return Err(Error::domain(format!(
            "posterior normaliser is not finite for measurement {psi}"
        )));
    }
    Ok(ExactPosterior {
        prior: prior.clone(),
        psi,
        weighting,
        branches,
        log_m,
    })
}

pub fn branch_responsibilities(p: &ExactPosterior) -> Vec<f64> {
    p.branches
        .iter()
        .map(|b| (b.log_weight - p.log_m).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn nig(t: f64, k: f64, b: f64, g: f64) -> NigParams {
        NigParams::new(t, k, b, g).unwrap()
    }

    fn prior(a: &[f64], comps: Vec<NigParams>) -> ProductPrior {
        ProductPrior::new(DirichletParams::new(a.to_vec()).unwrap(), comps).unwrap()
    }

    #[test]
    fn measurement_at_prior_mean() {
        let p = prior(&[2.0], vec![nig(0.5, 1.0, 3.0, 1.0)]);
        let post = exact_posterior(&p, 0.5).unwrap();
        let b = &post.branches[0];
        assert_eq!(b.nig_tilde, nig(0.5, 2.0, 3.5, 1.0));
        assert_eq!(b.a_tilde.alpha(), &[3.0]);
        assert_eq!(branch_responsibilities(&post), vec![1.0]);
    }

    #[test]
    fn symmetric_prior_splits_evenly() {
        let p = prior(&[1.0, 1.0], vec![nig(0.0, 1.0, 3.0, 1.0), nig(1.0, 1.0, 3.0, 1.0)]);
        let r = branch_responsibilities(&exact_posterior(&p, 0.5).unwrap());
        assert!((r[0] - 0.5).abs() < 1e-15 && (r[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closer_component_takes_more_mass() {
        let p = prior(&[1.0, 1.0], vec![nig(0.0, 1.0, 3.0, 1.0), nig(1.0, 1.0, 3.0, 1.0)]);
        let r = branch_responsibilities(&exact_posterior(&p, 0.95).unwrap());
        assert!(r[1] > r[0]);
    }

    #[test]
    fn prior_weight_shifts_responsibility() {
        let comps = vec![nig(0.0, 1.0, 3.0, 1.0), nig(1.0, 1.0, 3.0, 1.0)];
        let p = prior(&[3.0, 1.0], comps);
        let weighted = branch_responsibilities(&exact_posterior(&p, 0.5).unwrap());
        assert!((weighted[0] - 0.75).abs() < 1e-14);
        let flat = exact_posterior_with(&p, 0.5, BranchWeighting::Unweighted).unwrap();
        let flat = branch_responsibilities(&flat);
        assert!((flat[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn evidence_of_single_component_is_student_t() {
        // NIG(τ, κ, β, γ) predictive: Student-t with 2β dof, location τ,
        // scale² = γ(κ+1)/(βκ).
        let n = nig(0.3, 2.0, 3.0, 1.5);
        let p = prior(&[1.0], vec![n]);
        let psi = 1.1;
        let nu = 2.0 * n.beta;
        let s2 = n.gamma * (n.kappa + 1.0) / (n.beta * n.kappa);
        let z = (psi - n.tau) * (psi - n.tau) / (nu * s2);
        let ln_t = ln_gamma((nu + 1.0) / 2.0)
            - ln_gamma(nu / 2.0)
            - 0.5 * (nu * std::f64::consts::PI * s2).ln()
            - (nu + 1.0) / 2.0 * z.ln_1p();
        let post = exact_posterior(&p, psi).unwrap();
        assert!((post.log_evidence() - ln_t).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_finite_measurement() {
        let p = prior(&[1.0], vec![nig(0.0, 1.0, 3.0, 1.0)]);
        assert!(exact_posterior(&p, f64::NAN).is_err());
        assert!(exact_posterior(&p, f64::INFINITY).is_err());
    }

    #[test]
    fn extreme_shapes_stay_finite() {
        let p = prior(&[1.0, 1.0], vec![nig(0.0, 1.0, 1e5, 1e5), nig(1.0, 1.0, 2.5, 1e-4)]);
        let post = exact_posterior(&p, 0.9).unwrap();
        let r = branch_responsibilities(&post);
        assert!(r.iter().all(|x| x.is_finite()));
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    fn arb_nig() -> impl Strategy<Value = NigParams> {
        (-2.0f64..2.0, 0.1f64..20.0, 0.6f64..50.0, 1e-3f64..10.0)
            .prop_map(|(t, k, b, g)| nig(t, k, b, g))
    }

    proptest! {
        #[test]
        fn branch_invariants(
            comps in proptest::collection::vec(arb_nig(), 1..6),
            a in proptest::collection::vec(0.05f64..30.0, 6),
            psi in -5.0f64..5.0,
        ) {
            let k = comps.len();
            let p = prior(&a[..k], comps.clone());
            let post = exact_posterior(&p, psi).unwrap();
            prop_assert_eq!(post.k(), k);
            let r = branch_responsibilities(&post);
            prop_assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (j, b) in post.branches.iter().enumerate() {
                let c = &comps[j];
                prop_assert_eq!(b.updated_index.get(), j);
                prop_assert_eq!(b.nig_tilde.kappa, c.kappa + 1.0);
                prop_assert_eq!(b.nig_tilde.beta, c.beta + 0.5);
                prop_assert!(b.nig_tilde.gamma >= c.gamma);
                if psi != c.tau {
                    let (lo, hi) = if psi < c.tau { (psi, c.tau) } else { (c.tau, psi) };
                    prop_assert!(b.nig_tilde.tau >= lo && b.nig_tilde.tau <= hi);
                }
                for i in 0..k {
                    let diff = b.a_tilde.alpha()[i] - p.a().alpha()[i];
                    let expected = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((diff - expected).abs() < 1e-12);
                }
            }
        }
    }
}
