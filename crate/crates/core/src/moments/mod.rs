//! Exact single-measurement posterior over the Dirichlet NIG product, its
//! sufficient moments, and the projection back onto the product family.

mod posterior;
mod projection;
mod sequential;
mod sufficient;

pub use posterior::{
    branch_responsibilities, exact_posterior, exact_posterior_with, BranchWeighting, ExactPosterior,
    PosteriorBranch,
};
pub use projection::{implied_moments, match_moments, ProjectionMode, SINGULAR_THRESHOLD};
pub use sequential::{
    sequential_update, sequential_update_with, update_once, BetaFloor, Diagnostics, UpdateOptions,
};
pub use sufficient::{analytic_moments, ComponentMoments, SufficientMoments};
