//! One friction reading against the snow/ice prior: exact branch
//! posterior, its sufficient moments and both projections.

use semprop::conjugate::{expected_mixture, DirichletParams};
use semprop::moments::{analytic_moments, branch_responsibilities, exact_posterior, match_moments, ProjectionMode};
use semprop::property::{init_product_prior, PropertyTable, DEFAULT_C_CONST};

fn main() -> semprop::Result<()> {
    let table = PropertyTable::friction().select(&["snow", "ice"])?;
    let prior = init_product_prior(&DirichletParams::uniform(2), &table, DEFAULT_C_CONST)?.prior;
    let psi = 0.139;

    let post = exact_posterior(&prior, psi)?;
    let resp = branch_responsibilities(&post);
    for (name, (b, r)) in table.class_names().iter().zip(post.branches.iter().zip(&resp)) {
        println!("branch {name}: responsibility {r:.4}, updated NIG {:?}", b.nig_tilde);
    }

    let moments = analytic_moments(&post)?;
    for mode in [ProjectionMode::Paper, ProjectionMode::Corrected] {
        let projected = match_moments(&moments, mode)?;
        println!("{mode}: a = {:.4?}", projected.a().alpha());
        for n in projected.nig() {
            println!("    tau {:.4}, kappa {:.4}, beta {:.4}, gamma {:.6}", n.tau, n.kappa, n.beta, n.gamma);
        }
        // paper-mode shapes can fall below 1, where E[sigma^2] is undefined
        if let Ok(mix) = expected_mixture(&projected) {
            println!("    E[psi] = {:.4}", mix.mean());
        }
    }
    Ok(())
}
