//! Brute-force quadrature of the exact single-measurement posterior over
//! `(μᵢ, σᵢ²)` for each component.
//!
//! Densities are written out here from their definitions and use
//! `statrs` for log-gamma, so nothing is shared with the closed forms under
//! test.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::rules::{Panel, QuadRule};
use crate::conjugate::{NigParams, ProductPrior};
use crate::error::{Error, Result};
use crate::moments::{exact_posterior, ComponentMoments, SufficientMoments};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Integration layout for one component.
///
/// The `σ²` axis is integrated in `s = ln σ²` on panels of fixed width,
/// starting at the mode of the integrand and extended on each side until the
/// log integrand (weighted by the highest requested moment on the upper
/// side) has dropped by `tail_drop` nats. For each `σ²` node the `μ` axis
/// spans `±mu_halfwidth` conditional standard deviations around the
/// conditional mode, both located numerically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: QuadRule,
    pub nodes_per_panel: usize,
    pub mu_panels: usize,
    pub mu_halfwidth: f64,
    pub var_panel_width: f64,
    pub tail_drop: f64,
    pub max_var_span: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: QuadRule::GaussLegendre,
            nodes_per_panel: 16,
            mu_panels: 4,
            mu_halfwidth: 12.0,
            var_panel_width: 0.25,
            tail_drop: 46.0,
            max_var_span: 600.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_panel < 16 {
            return Err(Error::domain(format!("need at least 16 nodes per panel, got {}", self.nodes_per_panel)));
        }
        let positive = [self.mu_halfwidth, self.var_panel_width, self.tail_drop, self.max_var_span];
        if self.mu_panels == 0 || positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::domain("quadrature bounds and widths must be finite and positive"));
        }
        Ok(())
    }

    /// Halves the node spacing on both axes.
    pub fn refined(&self) -> Self {
        Self {
            mu_panels: self.mu_panels * 2,
            var_panel_width: self.var_panel_width / 2.0,
            ..*self
        }
    }
}

/// Scaled integrals `[1, μ, σ², σ⁴, μ²σ²]` of one integrand; the true value
/// of each is `exp(log_scale) · m[n]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Integrals {
    log_scale: f64,
    m: [f64; 5],
}

impl Integrals {
    fn log_mass(&self) -> f64 {
        self.log_scale + self.m[0].ln()
    }

    fn moments(&self) -> [f64; 4] {
        [self.m[1] / self.m[0], self.m[2] / self.m[0], self.m[3] / self.m[0], self.m[4] / self.m[0]]
    }
}

fn ln_nig(p: &NigParams, mu: f64, var: f64) -> f64 {
    let d = mu - p.tau;
    0.5 * p.kappa.ln() - 0.5 * (LN_2PI + var.ln()) + p.beta * p.gamma.ln() - ln_gamma(p.beta)
        - (p.beta + 1.0) * var.ln()
        - (2.0 * p.gamma + p.kappa * d * d) / (2.0 * var)
}

fn ln_gauss(x: f64, mu: f64, var: f64) -> f64 {
    let d = x - mu;
    -0.5 * (LN_2PI + var.ln()) - d * d / (2.0 * var)
}

struct Integrator<'a, F: Fn(f64, f64) -> f64> {
    log_f: F,
    spec: &'a QuadratureSpec,
    panel: Panel,
    mu_guess: f64,
}

struct Inner {
    log_peak: f64,
    i: [f64; 3],
}

impl<F: Fn(f64, f64) -> f64> Integrator<'_, F> {
    /// `∫ f(μ, v) μⁿ dμ` for n = 0, 1, 2, scaled by `exp(-log_peak)`.
    fn inner(&self, v: f64) -> Result<Inner> {
        let mut x0 = self.mu_guess;
        let mut h = v.sqrt();
        for _ in 0..3 {
            let (fm, f0, fp) = ((self.log_f)(x0 - h, v), (self.log_f)(x0, v), (self.log_f)(x0 + h, v));
            let d2 = fp - 2.0 * f0 + fm;
            if !(d2 < 0.0) {
                return Err(Error::Precision(format!("integrand not log-concave in mu at var = {v:e}")));
            }
            x0 -= h * (fp - fm) / (2.0 * d2);
            h /= (-d2).sqrt();
        }
        let log_peak = (self.log_f)(x0, v);
        let w = self.spec.mu_halfwidth * h;
        let mut i = [0.0; 3];
        for (mu, wt) in self.panel.composite(x0 - w, x0 + w, self.spec.mu_panels) {
            let f = wt * ((self.log_f)(mu, v) - log_peak).exp();
            i[0] += f;
            i[1] += f * mu;
            i[2] += f * mu * mu;
        }
        Ok(Inner { log_peak, i })
    }

    /// Log of the `s`-space integrand, optionally weighted by the heaviest
    /// moment of order `order`.
    fn log_outer(&self, s: f64, order: u8) -> Result<f64> {
        let v = s.exp();
        let inner = self.inner(v)?;
        let base = inner.log_peak + s;
        Ok(match order {
            0 => base + inner.i[0].ln(),
            _ => base + 2.0 * s + inner.i[0].ln().max(inner.i[2].ln() - s),
        })
    }

    fn mode(&self) -> Result<f64> {
        let (mut lo, mut hi) = (-60.0f64, 60.0f64);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut a = hi - g * (hi - lo);
        let mut b = lo + g * (hi - lo);
        let mut fa = self.log_outer(a, 0)?;
        let mut fb = self.log_outer(b, 0)?;
        while hi - lo > 1e-6 {
            if fa < fb {
                lo = a;
                a = b;
                fa = fb;
                b = lo + g * (hi - lo);
                fb = self.log_outer(b, 0)?;
            } else {
                hi = b;
                b = a;
                fb = fa;
                a = hi - g * (hi - lo);
                fa = self.log_outer(a, 0)?;
            }
        }
        Ok((lo + hi) / 2.0)
    }

    fn integrate(&self, order: u8) -> Result<Integrals> {
        let spec = self.spec;
        let mode = self.mode()?;
        let peak = self.log_outer(mode, 0)?;
        let step = spec.var_panel_width;

        let mut lo = mode;
        while peak - self.log_outer(lo, 0)? < spec.tail_drop {
            lo -= step;
            if mode - lo > spec.max_var_span {
                return Err(Error::Precision("lower variance tail did not decay".into()));
            }
        }
        let mut hi = mode;
        let mut top = self.log_outer(mode, order)?;
        loop {
            hi += step;
            let here = self.log_outer(hi, order)?;
            top = top.max(here);
            if top - here >= spec.tail_drop {
                break;
            }
            if hi - mode > spec.max_var_span {
                return Err(Error::Precision(format!(
                    "upper variance tail of order-{order} integrand did not decay (beta too close to its moment bound)"
                )));
            }
        }

        let panels = ((hi - lo) / step).ceil() as usize;
        let mut m = [0.0; 5];
        for (s, ws) in self.panel.composite(lo, hi, panels) {
            let v = s.exp();
            let inner = self.inner(v)?;
            let base = ws * (inner.log_peak + s - peak).exp();
            m[0] += base * inner.i[0];
            m[1] += base * inner.i[1];
            m[2] += base * inner.i[0] * v;
            m[3] += base * inner.i[0] * v * v;
            m[4] += base * inner.i[2] * v;
        }
        if !m.iter().all(|x| x.is_finite()) || !(m[0] > 0.0) {
            return Err(Error::Precision("non-finite quadrature sum".into()));
        }
        Ok(Integrals { log_scale: peak, m })
    }
}

fn integrate<F: Fn(f64, f64) -> f64>(log_f: F, mu_guess: f64, spec: &QuadratureSpec, order: u8) -> Result<Integrals> {
    Integrator {
        log_f,
        spec,
        panel: Panel::new(spec.rule, spec.nodes_per_panel),
        mu_guess,
    }
    .integrate(order)
}

struct QuadPosterior {
    prior: Vec<Integrals>,
    updated: Vec<Integrals>,
    /// `ln ∫ prior × likelihood dΘ`.
    log_total: f64,
    masses: Vec<f64>,
}

fn quad_posterior(prior: &ProductPrior, psi: f64, spec: &QuadratureSpec, order: u8) -> Result<QuadPosterior> {
    spec.validate()?;
    if !psi.is_finite() {
        return Err(Error::domain(format!("measurement {psi} is not finite")));
    }
    let mut p = Vec::with_capacity(prior.k());
    let mut u = Vec::with_capacity(prior.k());
    for n in prior.nig() {
        p.push(integrate(|mu, v| ln_nig(n, mu, v), n.tau, spec, order)?);
        u.push(integrate(|mu, v| ln_nig(n, mu, v) + ln_gauss(psi, mu, v), (n.tau + psi) / 2.0, spec, order)?);
    }
    let a = prior.a().alpha();
    let a0: f64 = a.iter().sum();
    let log_prior_total: f64 = p.iter().map(Integrals::log_mass).sum();
    let log_branch: Vec<f64> = (0..prior.k())
        .map(|j| (a[j] / a0).ln() + u[j].log_mass() + log_prior_total - p[j].log_mass())
        .collect();
    let top = log_branch.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_branch.iter().map(|l| (l - top).exp()).sum();
    let masses = log_branch.iter().map(|l| (l - top).exp() / sum).collect();
    Ok(QuadPosterior {
        prior: p,
        updated: u,
        log_total: top + sum.ln(),
        masses,
    })
}

fn settled(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-4 * scale
}

fn check_k(prior: &ProductPrior, max: usize) -> Result<()> {
    if prior.k() > max {
        return Err(Error::Unsupported(format!("quadrature oracle for k = {} (max {max})", prior.k())));
    }
    Ok(())
}

fn assemble(prior: &ProductPrior, q: &QuadPosterior) -> SufficientMoments {
    let a = prior.a().alpha();
    let a0: f64 = a.iter().sum();
    let k = prior.k();
    let components = (0..k)
        .map(|i| {
            let r = q.masses[i];
            let up = q.updated[i].moments();
            let pr = if k > 1 { q.prior[i].moments() } else { up };
            let mix = |n: usize| r * up[n] + (1.0 - r) * pr[n];
            let (mut e_w, mut e_w2) = (0.0, 0.0);
            for (j, rj) in q.masses.iter().enumerate() {
                let ai = a[i] + if i == j { 1.0 } else { 0.0 };
                e_w += rj * ai / (a0 + 1.0);
                e_w2 += rj * ai * (ai + 1.0) / ((a0 + 1.0) * (a0 + 2.0));
            }
            ComponentMoments {
                e_mu: mix(0),
                e_var: mix(1),
                e_var2: mix(2),
                e_mu2var: mix(3),
                e_w,
                e_w2,
            }
        })
        .collect();
    SufficientMoments { components }
}

/// Sufficient moments of the exact posterior by quadrature, checked against
/// a run at half the node spacing (disagreement above 1e-4 relative is a
/// precision error). Requires k ≤ 3 and every β comfortably above 2.
pub fn quad_moments(prior: &ProductPrior, psi: f64, spec: &QuadratureSpec) -> Result<SufficientMoments> {
    check_k(prior, 3)?;
    let coarse = assemble(prior, &quad_posterior(prior, psi, spec, 2)?);
    let fine = assemble(prior, &quad_posterior(prior, psi, &spec.refined(), 2)?);
    for (i, (c, f)) in coarse.components.iter().zip(&fine.components).enumerate() {
        let mu_scale = f.e_mu.abs() + f.e_var.sqrt();
        let pairs = [
            (c.e_mu, f.e_mu, mu_scale),
            (c.e_var, f.e_var, f.e_var),
            (c.e_var2, f.e_var2, f.e_var2),
            (c.e_mu2var, f.e_mu2var, f.e_mu2var),
            (c.e_w, f.e_w, f.e_w),
            (c.e_w2, f.e_w2, f.e_w2),
        ];
        if let Some((x, y, _)) = pairs.iter().find(|(x, y, s)| !settled(*x, *y, *s)) {
            return Err(Error::Precision(format!("component {i}: refinement moved a moment from {x} to {y}")));
        }
    }
    Ok(fine)
}

/// Branch masses `∫ posterior` restricted to each branch, by quadrature.
pub fn quad_branch_masses(prior: &ProductPrior, psi: f64, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    check_k(prior, 3)?;
    let coarse = quad_posterior(prior, psi, spec, 0)?.masses;
    let fine = quad_posterior(prior, psi, &spec.refined(), 0)?.masses;
    if coarse.iter().zip(&fine).any(|(c, f)| !settled(*c, *f, 1.0)) {
        return Err(Error::Precision(format!("branch masses moved from {coarse:?} to {fine:?}")));
    }
    Ok(fine)
}

/// `∫ prior × likelihood dΘ` by quadrature divided by the closed-form
/// evidence; 1 when the closed-form normaliser is right. k ≤ 2.
pub fn normalization_check(prior: &ProductPrior, psi: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_k(prior, 2)?;
    let coarse = quad_posterior(prior, psi, spec, 0)?.log_total;
    let fine = quad_posterior(prior, psi, &spec.refined(), 0)?.log_total;
    if !settled(coarse, fine, 1.0) {
        return Err(Error::Precision(format!("log normaliser moved from {coarse} to {fine}")));
    }
    let closed = exact_posterior(prior, psi)?.log_evidence();
    Ok((fine - closed).exp())
}

/// `∫ NIG(μ, σ² | p) dμ dσ²` by quadrature.
pub fn nig_total_mass(p: &NigParams, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let i = integrate(|mu, v| ln_nig(p, mu, v), p.tau, spec, 0)?;
    Ok(i.log_mass().exp())
}

/// `[E[μ], E[σ²], E[σ⁴], E[μ²σ²]]` of a single NIG by quadrature.
pub fn nig_quad_moments(p: &NigParams, spec: &QuadratureSpec) -> Result<[f64; 4]> {
    spec.validate()?;
    Ok(integrate(|mu, v| ln_nig(p, mu, v), p.tau, spec, 2)?.moments())
}
