//! Closed forms against the brute-force oracles.
//!
//! Quadrature-heavy checks are `#[ignore]`d; run them with
//! `cargo test -- --ignored`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semprop::conjugate::{DirichletParams, NigParams, ProductPrior};
use semprop::moments::{
    analytic_moments, branch_responsibilities, exact_posterior, exact_posterior_with, BranchWeighting,
    ComponentMoments,
};
use semprop::oracle::{
    normalization_check, quad_branch_masses, quad_moments, read_fixture, QuadratureSpec,
};
use semprop::property::{init_product_prior, PropertyTable, DEFAULT_C_CONST};

fn nig(t: f64, k: f64, b: f64, g: f64) -> NigParams {
    NigParams::new(t, k, b, g).unwrap()
}

fn prior(a: &[f64], comps: Vec<NigParams>) -> ProductPrior {
    ProductPrior::new(DirichletParams::new(a.to_vec()).unwrap(), comps).unwrap()
}

fn snow_ice() -> ProductPrior {
    let t = PropertyTable::friction().select(&["snow", "ice"]).unwrap();
    init_product_prior(&DirichletParams::uniform(2), &t, DEFAULT_C_CONST).unwrap().prior
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale
}

fn moment_error(x: &ComponentMoments, y: &ComponentMoments) -> f64 {
    let mu_scale = y.e_mu.abs().max(y.e_var.sqrt());
    [
        rel(x.e_mu, y.e_mu, mu_scale),
        rel(x.e_var, y.e_var, y.e_var),
        rel(x.e_var2, y.e_var2, y.e_var2),
        rel(x.e_mu2var, y.e_mu2var, y.e_mu2var),
        rel(x.e_w, y.e_w, y.e_w),
        rel(x.e_w2, y.e_w2, y.e_w2),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

#[test]
fn golden_fixture_matches_closed_forms() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/golden_moments.json");
    let fixture = read_fixture(std::path::Path::new(path)).unwrap();
    assert!(!fixture.cases.is_empty());
    for case in &fixture.cases {
        let post = exact_posterior(&case.prior, case.psi).unwrap();
        let analytic = analytic_moments(&post).unwrap();
        for (a, q) in analytic.components.iter().zip(&case.moments.components) {
            assert!(moment_error(a, q) < 1e-5, "{}: {a:?} vs {q:?}", case.name);
        }
        for (r, q) in branch_responsibilities(&post).iter().zip(&case.responsibilities) {
            assert!((r - q).abs() < 1e-8, "{}: {r} vs {q}", case.name);
        }
    }
}

#[test]
#[ignore = "quadrature"]
fn normalisation_standard_fixtures() {
    let spec = QuadratureSpec::default();
    let single = prior(&[2.0], vec![nig(0.5, 1.0, 3.0, 1.0)]);
    let n = normalization_check(&single, 0.8, &spec).unwrap();
    assert!((n - 1.0).abs() < 1e-6, "{n}");
    let n = normalization_check(&snow_ice(), 0.139, &spec).unwrap();
    assert!((n - 1.0).abs() < 1e-4, "{n}");
}

#[test]
#[ignore = "quadrature"]
fn normalisation_survives_scaled_gamma() {
    let spec = QuadratureSpec::default();
    let base = snow_ice();
    let scaled: Vec<NigParams> = base.nig().iter().map(|n| NigParams { gamma: 10.0 * n.gamma, ..*n }).collect();
    let p = ProductPrior::new(base.a().clone(), scaled).unwrap();
    let n = normalization_check(&p, 0.139, &spec).unwrap();
    assert!((n - 1.0).abs() < 1e-4, "{n}");
}

#[test]
#[ignore = "quadrature"]
fn two_component_branch_masses() {
    let spec = QuadratureSpec::default();
    let p = prior(&[1.0, 1.0], vec![nig(0.0, 1.0, 3.0, 1.0), nig(1.0, 1.0, 3.0, 1.0)]);
    let r = branch_responsibilities(&exact_posterior(&p, 0.95).unwrap());
    let q = quad_branch_masses(&p, 0.95, &spec).unwrap();
    assert!(r[1] > r[0]);
    for (a, b) in r.iter().zip(&q) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
#[ignore = "quadrature"]
fn asymmetric_three_component_masses_need_prior_weight() {
    let spec = QuadratureSpec::default();
    let p = prior(
        &[1.0, 2.5, 0.7],
        vec![nig(0.0, 0.5, 3.2, 0.4), nig(0.8, 2.0, 6.0, 1.5), nig(-0.6, 1.0, 4.5, 0.2)],
    );
    let q = quad_branch_masses(&p, 0.3, &spec).unwrap();
    let weighted = branch_responsibilities(&exact_posterior(&p, 0.3).unwrap());
    for (a, b) in weighted.iter().zip(&q) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
    let flat = branch_responsibilities(&exact_posterior_with(&p, 0.3, BranchWeighting::Unweighted).unwrap());
    assert!(flat.iter().zip(&q).any(|(a, b)| (a - b).abs() > 1e-2));
}

#[test]
#[ignore = "quadrature"]
fn nig_moment_identities_by_quadrature() {
    let spec = QuadratureSpec::default();
    let p = prior(&[1.0], vec![nig(0.0, 1.0, 3.0, 2.0)]);
    // with ψ = τ the single-branch posterior is NIG(0, 2, 3.5, 2)
    let m = quad_moments(&p, 0.0, &spec).unwrap().components[0];
    assert!(m.e_mu.abs() < 1e-8);
    let upd = nig(0.0, 2.0, 3.5, 2.0);
    assert!((m.e_var - upd.mean_var().unwrap()).abs() < 1e-6);
    assert!((m.e_var2 - upd.mean_var_sq().unwrap()).abs() < 1e-6);
    assert!((m.e_mu2var - upd.mean_mu_sq_var().unwrap()).abs() < 1e-6);
}

#[test]
#[ignore = "quadrature"]
fn analytic_moments_match_quadrature_on_random_priors() {
    let spec = QuadratureSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let comps = (0..2)
            .map(|_| nig(rng.random_range(-1.0..1.0), rng.random_range(0.2..5.0), rng.random_range(3.0..8.0), rng.random_range(0.05..2.0)))
            .collect();
        let a = [rng.random_range(0.5..5.0), rng.random_range(0.5..5.0)];
        let p = prior(&a, comps);
        let psi = rng.random_range(-1.5..1.5);
        let analytic = analytic_moments(&exact_posterior(&p, psi).unwrap()).unwrap();
        let quad = quad_moments(&p, psi, &spec).unwrap();
        for (x, y) in analytic.components.iter().zip(&quad.components) {
            worst = worst.max(moment_error(x, y));
        }
    }
    assert!(worst < 1e-5, "worst relative error {worst:e}");
}
