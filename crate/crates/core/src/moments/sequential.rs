use serde::{Deserialize, Serialize};

use super::posterior::{exact_posterior_with, BranchWeighting};
use super::projection::{project_nig, project_weight, ProjectionMode};
use super::sufficient::analytic_moments;
use crate::conjugate::{DirichletParams, NigParams, ProductPrior};
use crate::error::{Error, Result};

/// Lower bound on the NIG shape so that `E[σ⁴]` exists.
///
/// A component with `β < 2 + ε` is clamped to `β = 2 + ε` and `γ` is
/// rescaled so that `γ/(β − 1)` equals a target variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaFloor {
    pub epsilon: f64,
}

impl Default for BetaFloor {
    fn default() -> Self {
        Self { epsilon: 1e-6 }
    }
}

impl BetaFloor {
    pub fn min_beta(&self) -> f64 {
        2.0 + self.epsilon
    }

    /// Clamps `p` with `γ` chosen so that `E[σ²] = target_var`. Returns
    /// `None` when no clamp was needed.
    pub fn clamp(&self, p: &NigParams, target_var: f64) -> Option<NigParams> {
        let beta = self.min_beta();
        (p.beta < beta).then(|| NigParams {
            beta,
            gamma: target_var * (beta - 1.0),
            ..*p
        })
    }

    /// Clamps while preserving the component's own `E[σ²] = γ/(β−1)`.
    pub fn clamp_preserving(&self, p: &NigParams, component: usize) -> Result<Option<NigParams>> {
        if p.beta >= self.min_beta() {
            return Ok(None);
        }
        let target = p.mean_var().ok_or_else(|| Error::MomentUndefined {
            component,
            branch: None,
            reason: format!(
                "cannot floor beta = {} while preserving E[sigma^2] (needs beta > 1)",
                p.beta
            ),
        })?;
        Ok(self.clamp(p, target))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateOptions {
    pub mode: ProjectionMode,
    pub floor: BetaFloor,
    pub weighting: BranchWeighting,
}

impl UpdateOptions {
    pub fn with_mode(mode: ProjectionMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

/// Counters and messages accumulated across updates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub beta_clamps: usize,
    pub singular_fallbacks: usize,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn merge(&mut self, other: Diagnostics) {
        self.beta_clamps += other.beta_clamps;
        self.singular_fallbacks += other.singular_fallbacks;
        self.warnings.extend(other.warnings);
    }
}

fn floor_prior(prior: &ProductPrior, floor: &BetaFloor, diag: &mut Diagnostics) -> Result<ProductPrior> {
    let mut changed = false;
    let mut nig = prior.nig().to_vec();
    for (i, n) in nig.iter_mut().enumerate() {
        if let Some(c) = floor.clamp_preserving(n, i)? {
            *n = c;
            diag.beta_clamps += 1;
            changed = true;
        }
    }
    if changed {
        ProductPrior::new(prior.a().clone(), nig)
    } else {
        Ok(prior.clone())
    }
}

fn is_recoverable(e: &Error) -> bool {
    matches!(e, Error::SingularProjection { .. } | Error::InvalidParameter { .. })
}

/// One exact-posterior / moments / projection step.
///
/// The prior is floored first. A component whose projection is singular or
/// yields an inadmissible value keeps its pre-update parameters and a
/// warning is recorded. Projected shapes below the floor are clamped with
/// the matched `E[σ²]` as target, so the result always satisfies the floor.
/// With a single component the weight projection is degenerate and the
/// exact `a + 1` is returned.
pub fn update_once(
    prior: &ProductPrior,
    psi: f64,
    opts: &UpdateOptions,
    diag: &mut Diagnostics,
) -> Result<ProductPrior> {
    let prior = floor_prior(prior, &opts.floor, diag)?;
    let post = exact_posterior_with(&prior, psi, opts.weighting)?;
    let moments = analytic_moments(&post)?;
    let k = prior.k();
    let mut a = Vec::with_capacity(k);
    let mut nig = Vec::with_capacity(k);
    for (i, m) in moments.components.iter().enumerate() {
        let projected = match project_nig(i, m, opts.mode) {
            Ok(n) => match opts.floor.clamp(&n, m.e_var) {
                Some(c) => {
                    diag.beta_clamps += 1;
                    c
                }
                None => n,
            },
            Err(e) if is_recoverable(&e) => {
                diag.singular_fallbacks += 1;
                diag.warnings.push(format!("psi = {psi}: {e}; component {i} kept its prior"));
                *prior.component(i)
            }
            Err(e) => return Err(e),
        };
        nig.push(projected);

        let weight = if k == 1 {
            post.branches[0].a_tilde.alpha()[0]
        } else {
            match project_weight(i, m) {
                Ok(w) => w,
                Err(e) if is_recoverable(&e) => {
                    diag.singular_fallbacks += 1;
                    diag.warnings.push(format!("psi = {psi}: {e}; weight {i} kept its prior"));
                    prior.a().alpha()[i]
                }
                Err(e) => return Err(e),
            }
        };
        a.push(weight);
    }
    ProductPrior::new(DirichletParams::new(a)?, nig)
}

/// Folds [`update_once`] over `measurements` in order.
pub fn sequential_update_with(
    prior: &ProductPrior,
    measurements: &[f64],
    opts: &UpdateOptions,
) -> Result<(ProductPrior, Diagnostics)> {
    let mut diag = Diagnostics::default();
    let mut current = prior.clone();
    for (index, &psi) in measurements.iter().enumerate() {
        current = update_once(&current, psi, opts, &mut diag).map_err(|e| Error::AtMeasurement {
            index,
            source: Box::new(e),
        })?;
    }
    Ok((current, diag))
}

pub fn sequential_update(
    prior: &ProductPrior,
    measurements: &[f64],
    mode: ProjectionMode,
) -> Result<ProductPrior> {
    sequential_update_with(prior, measurements, &UpdateOptions::with_mode(mode)).map(|(p, _)| p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{exact_posterior, match_moments};

    fn nig(t: f64, k: f64, b: f64, g: f64) -> NigParams {
        NigParams::new(t, k, b, g).unwrap()
    }

    fn two_class() -> ProductPrior {
        ProductPrior::new(
            DirichletParams::uniform(2),
            vec![nig(0.0, 1.0, 3.0, 1.0), nig(1.0, 1.0, 3.0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn empty_stream_is_identity() {
        let p = ProductPrior::new(DirichletParams::uniform(1), vec![nig(0.0, 1.0, 0.5, 1.0)]).unwrap();
        assert_eq!(sequential_update(&p, &[], ProjectionMode::Paper).unwrap(), p);
    }

    #[test]
    fn one_step_is_the_composition() {
        let p = two_class();
        let m = analytic_moments(&exact_posterior(&p, 0.7).unwrap()).unwrap();
        let direct = match_moments(&m, ProjectionMode::Corrected).unwrap();
        let folded = sequential_update(&p, &[0.7], ProjectionMode::Corrected).unwrap();
        assert_eq!(folded, direct);
    }

    #[test]
    fn floor_preserves_expected_variance() {
        let n = nig(0.3, 1.0, 1.5, 0.2);
        let c = BetaFloor::default().clamp_preserving(&n, 0).unwrap().unwrap();
        assert_eq!(c.beta, 2.0 + 1e-6);
        assert!((c.mean_var().unwrap() - 0.4).abs() < 1e-15);
        assert!(BetaFloor::default().clamp_preserving(&nig(0.3, 1.0, 0.5, 0.2), 4).is_err());
        assert!(BetaFloor::default().clamp_preserving(&nig(0.3, 1.0, 3.0, 0.2), 0).unwrap().is_none());
    }

    #[test]
    fn result_always_respects_floor() {
        let p = two_class();
        for mode in [ProjectionMode::Paper, ProjectionMode::Corrected] {
            let (post, _) =
                sequential_update_with(&p, &[0.1, 0.9, 0.2, 0.4], &UpdateOptions::with_mode(mode)).unwrap();
            assert!(post.nig().iter().all(|n| n.beta >= 2.0 + 1e-6));
        }
    }

    #[test]
    fn single_component_counts_exactly() {
        let p = ProductPrior::new(DirichletParams::new(vec![2.0]).unwrap(), vec![nig(0.5, 1.0, 3.0, 1.0)]).unwrap();
        let post = sequential_update(&p, &[0.5, 0.5, 0.5], ProjectionMode::Corrected).unwrap();
        assert_eq!(post.a().alpha(), &[5.0]);
    }

    #[test]
    fn repeated_measurement_at_component_mean_wins_weight() {
        let p = ProductPrior::new(
            DirichletParams::uniform(3),
            vec![nig(0.0, 1.0, 3.0, 0.1), nig(0.5, 1.0, 3.0, 0.1), nig(1.0, 1.0, 3.0, 0.1)],
        )
        .unwrap();
        let mut current = p;
        let mut last_ratio = 0.0;
        for _ in 0..20 {
            current = sequential_update(&current, &[1.0], ProjectionMode::Corrected).unwrap();
            let a = current.a().alpha();
            let ratio = a[2] / (a[0] + a[1]);
            assert!(ratio > last_ratio);
            last_ratio = ratio;
            assert_eq!(crate::conjugate::argmax(a), 2);
        }
    }

    #[test]
    fn errors_carry_measurement_index() {
        let p = two_class();
        match sequential_update(&p, &[0.1, f64::NAN], ProjectionMode::Paper) {
            Err(Error::AtMeasurement { index: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
