//! Fuse per-pixel class labels into a Dirichlet belief and compare the
//! closed-form predictive with a Monte-Carlo estimate.

use semprop::conjugate::{dirichlet_pdf, dirichlet_update, predictive_class, CategoricalDist, DirichletParams};
use semprop::oracle::mc_predictive_with_error;

fn main() -> semprop::Result<()> {
    let prior = DirichletParams::uniform(3);
    // 12 labels observed in one voxel: mostly class 1, some confusion with 3
    let counts = [9, 1, 2];
    let posterior = dirichlet_update(&prior, &counts)?;
    println!("alpha after fusion: {:?}", posterior.alpha());

    let closed = predictive_class(&posterior)?;
    let mc = mc_predictive_with_error(&posterior, 200_000, 7)?;
    for (i, ((c, m), se)) in closed.probs().iter().zip(mc.mean.probs()).zip(&mc.std_error).enumerate() {
        println!("class {}: closed form {c:.5}, Monte Carlo {m:.5} +/- {se:.5}", i + 1);
    }

    let at_mean = dirichlet_pdf(&posterior, &closed)?;
    let flat = dirichlet_pdf(&posterior, &CategoricalDist::uniform(3))?;
    println!("density at the predictive mean {at_mean:.3}, at the simplex centre {flat:.3}");
    Ok(())
}
