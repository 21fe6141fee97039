use serde::{Deserialize, Serialize};

use super::posterior::{branch_responsibilities, ExactPosterior};
use crate::conjugate::NigParams;
use crate::error::{Error, Result};

/// The six sufficient moments of one mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentMoments {
    pub e_mu: f64,
    pub e_var: f64,
    pub e_var2: f64,
    pub e_mu2var: f64,
    pub e_w: f64,
    pub e_w2: f64,
}

impl ComponentMoments {
    fn nig(p: &NigParams, component: usize, branch: Option<usize>) -> Result<[f64; 4]> {
        match (p.mean_var(), p.mean_var_sq(), p.mean_mu_sq_var()) {
            (Some(v), Some(v2), Some(mv)) => Ok([p.tau, v, v2, mv]),
            _ => Err(Error::MomentUndefined {
                component,
                branch,
                reason: format!("E[sigma^4] needs beta > 2, got {}", p.beta),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficientMoments {
    pub components: Vec<ComponentMoments>,
}

impl SufficientMoments {
    pub fn k(&self) -> usize {
        self.components.len()
    }
}

/// Sufficient moments of the exact posterior.
///
/// For component `i`, branch `j` contributes the moments of its updated NIG
/// when `j = i` and the prior NIG of `i` otherwise, weighted by the branch
/// responsibility. Weight moments come from each branch's `ã` with total
/// `Σa + 1`.
pub fn analytic_moments(p: &ExactPosterior) -> Result<SufficientMoments> {
    let k = p.k();
    let r = branch_responsibilities(p);
    let a0 = p.prior.a().total() + 1.0;
    let mut components = Vec::with_capacity(k);
    for i in 0..k {
        let updated = ComponentMoments::nig(&p.branches[i].nig_tilde, i, Some(i))?;
        let kept = if k > 1 {
            ComponentMoments::nig(p.prior.component(i), i, None)?
        } else {
            [0.0; 4]
        };
        let ri = r[i];
        let mix = |n: usize| ri * updated[n] + (1.0 - ri) * kept[n];

        let mut e_w = 0.0;
        let mut e_w2 = 0.0;
        for (b, rj) in p.branches.iter().zip(&r) {
            let ai = b.a_tilde.alpha()[i];
            e_w += rj * ai / a0;
            e_w2 += rj * ai * (ai + 1.0) / (a0 * (a0 + 1.0));
        }
        let m = ComponentMoments {
            e_mu: mix(0),
            e_var: mix(1),
            e_var2: mix(2),
            e_mu2var: mix(3),
            e_w,
            e_w2,
        };
        debug_assert!(m.e_var > 0.0 && m.e_var2 > m.e_var * m.e_var, "{m:?}");
        debug_assert!(k == 1 || (m.e_w2 > m.e_w * m.e_w && m.e_w2 < m.e_w), "{m:?}");
        components.push(m);
    }
    Ok(SufficientMoments { components })
}
