//! Golden `(prior, ψ, moments)` cases computed by quadrature and committed
//! as test data.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::nig_quad::{quad_branch_masses, quad_moments, QuadratureSpec};
use crate::conjugate::{DirichletParams, NigParams, ProductPrior};
use crate::error::{Error, Result};
use crate::moments::SufficientMoments;

pub const FIXTURE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenCase {
    pub name: String,
    pub prior: ProductPrior,
    pub psi: f64,
    pub moments: SufficientMoments,
    pub responsibilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFixture {
    pub version: u32,
    pub spec: QuadratureSpec,
    pub cases: Vec<GoldenCase>,
}

fn prior(a: &[f64], nig: &[(f64, f64, f64, f64)]) -> ProductPrior {
    let nig = nig
        .iter()
        .map(|&(t, k, b, g)| NigParams::new(t, k, b, g).expect("valid fixture NIG"))
        .collect();
    ProductPrior::new(DirichletParams::new(a.to_vec()).expect("valid fixture a"), nig).expect("valid fixture prior")
}

/// The fixed set of cases written by the `oracle` command.
pub fn golden_cases() -> Vec<(String, ProductPrior, f64)> {
    vec![
        ("single_at_tau".into(), prior(&[2.0], &[(0.5, 1.0, 3.0, 1.0)]), 0.5),
        ("single_offset".into(), prior(&[1.0], &[(0.2, 3.0, 5.0, 2.0)]), 1.3),
        (
            "two_close_to_second".into(),
            prior(&[1.0, 1.0], &[(0.0, 1.0, 3.0, 1.0), (1.0, 1.0, 3.0, 1.0)]),
            0.95,
        ),
        (
            "two_weighted".into(),
            prior(&[5.0, 1.0], &[(0.39, 2.0, 4.0, 0.015), (0.192, 1.5, 3.5, 0.005)]),
            0.2,
        ),
        (
            "three_asymmetric".into(),
            prior(&[1.0, 2.5, 0.7], &[(0.0, 0.5, 3.2, 0.4), (0.8, 2.0, 6.0, 1.5), (-0.6, 1.0, 4.5, 0.2)]),
            0.3,
        ),
    ]
}

/// Computes every golden case by quadrature and writes the fixture.
pub fn write_fixture(path: &Path, spec: &QuadratureSpec) -> Result<GoldenFixture> {
    let cases = golden_cases()
        .into_iter()
        .map(|(name, prior, psi)| {
            Ok(GoldenCase {
                moments: quad_moments(&prior, psi, spec)?,
                responsibilities: quad_branch_masses(&prior, psi, spec)?,
                name,
                prior,
                psi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fixture = GoldenFixture {
        version: FIXTURE_VERSION,
        spec: *spec,
        cases,
    };
    let text = serde_json::to_string_pretty(&fixture).expect("fixture serialises");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
    Ok(fixture)
}

pub fn read_fixture(path: &Path) -> Result<GoldenFixture> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let f: GoldenFixture = serde_json::from_str(&text).map_err(|e| parse(e.to_string()))?;
    if f.version != FIXTURE_VERSION {
        return Err(parse(format!("unsupported fixture version {}", f.version)));
    }
    for c in &f.cases {
        ProductPrior::new(c.prior.a().clone(), c.prior.nig().to_vec())
            .map_err(|e| parse(format!("case {}: {e}", c.name)))?;
    }
    Ok(f)
}
