//! Closed-form moments against brute-force quadrature on one prior.

use semprop::conjugate::{DirichletParams, NigParams, ProductPrior};
use semprop::moments::{analytic_moments, exact_posterior};
use semprop::oracle::{normalization_check, quad_moments, QuadratureSpec};

fn main() -> semprop::Result<()> {
    let prior = ProductPrior::new(
        DirichletParams::new(vec![2.0, 1.0])?,
        vec![NigParams::new(0.3, 2.0, 4.0, 0.05)?, NigParams::new(0.6, 1.0, 3.5, 0.08)?],
    )?;
    let psi = 0.45;
    let spec = QuadratureSpec::default();

    println!("posterior normaliser by quadrature: {:.10}", normalization_check(&prior, psi, &spec)?);
    let analytic = analytic_moments(&exact_posterior(&prior, psi)?)?;
    let quad = quad_moments(&prior, psi, &spec)?;
    for (i, (a, q)) in analytic.components.iter().zip(&quad.components).enumerate() {
        println!("component {i}");
        for (name, x, y) in [
            ("E[mu]", a.e_mu, q.e_mu),
            ("E[var]", a.e_var, q.e_var),
            ("E[var^2]", a.e_var2, q.e_var2),
            ("E[mu^2 var]", a.e_mu2var, q.e_mu2var),
            ("E[w]", a.e_w, q.e_w),
            ("E[w^2]", a.e_w2, q.e_w2),
        ] {
            println!("  {name:<12} closed {x:.10e}  quadrature {y:.10e}  rel {:.1e}", ((x - y) / y).abs());
        }
    }
    Ok(())
}
