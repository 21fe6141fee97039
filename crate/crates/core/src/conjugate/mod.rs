//! Exact distribution types and the closed-form Dirichlet–Categorical machinery.
//!
//! Everything here is an immutable value type; operations are pure functions.

mod categorical;
mod dirichlet;
mod gaussian;
mod nig;
mod product;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use categorical::{categorical_pmf, CategoricalDist, SIMPLEX_TOLERANCE};
pub use dirichlet::{dirichlet_ln_pdf, dirichlet_pdf, dirichlet_update, predictive_class, DirichletParams};
pub use gaussian::{mixture_pdf, GaussianMixture, GaussianParams};
pub use nig::{nig_ln_pdf, nig_pdf, NigParams};
pub use product::{expected_mixture, product_prior_ln_pdf, product_prior_pdf, ProductPrior};

/// A semantic class, stored zero-based.
///
/// File formats and user-facing output use one-based labels; convert with
/// [`ClassIndex::from_one_based`] and [`ClassIndex::one_based`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassIndex(pub usize);

impl ClassIndex {
    pub fn from_one_based(label: usize) -> Option<Self> {
        label.checked_sub(1).map(ClassIndex)
    }

    pub fn one_based(self) -> usize {
        self.0 + 1
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for ClassIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.one_based())
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
