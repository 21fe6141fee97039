//! Independent numerical verifiers for the closed forms: simplex lattices,
//! quadrature over the exact posterior and Monte Carlo.
//!
//! The quadrature routines are deliberately slow and are exercised by the
//! ignored test tier and the acceptance suite.

mod fixture;
mod mc;
mod nig_quad;
mod rules;
mod simplex;

pub use fixture::{golden_cases, read_fixture, write_fixture, GoldenCase, GoldenFixture};
pub use mc::{mc_predictive, mc_predictive_with_error, McEstimate, MC_MIN_SAMPLES};
pub use nig_quad::{
    nig_quad_moments, nig_total_mass, normalization_check, quad_branch_masses, quad_moments, QuadratureSpec,
};
pub use rules::{gauss_legendre, tanh_sinh, QuadRule};
pub use simplex::{grid_posterior_dirichlet, SimplexGrid, DEFAULT_LATTICE_STEPS};
