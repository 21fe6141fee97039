//! Turn a raw force stream into smoothed friction readings and fuse them.

use semprop::conjugate::DirichletParams;
use semprop::moments::{sequential_update_with, ProjectionMode, UpdateOptions};
use semprop::property::{
    friction_from_forces, init_product_prior, read_force_stream, write_force_stream, ForceSample, LowPassState,
    PropertyTable, DEFAULT_C_CONST,
};

fn main() -> semprop::Result<()> {
    // a foot sliding on snow: tangential force settles near 0.39 of the load
    let samples: Vec<ForceSample> = (0..40)
        .map(|i| {
            let t = i as f64 * 0.01;
            let f_n = 300.0 + 5.0 * (t * 40.0).sin();
            ForceSample {
                timestamp: t,
                f_t: f_n * (0.39 + 0.03 * (t * 90.0).cos()),
                f_n,
            }
        })
        .collect();
    let path = std::env::temp_dir().join("semprop_force_stream.csv");
    write_force_stream(&path, &samples)?;
    let samples = read_force_stream(&path)?;

    let mut filter = LowPassState::new(0.3, friction_from_forces(&samples[0])?.psi)?;
    let readings: Vec<f64> = samples
        .iter()
        .map(|s| friction_from_forces(s).map(|r| filter.step(r.psi)))
        .collect::<semprop::Result<_>>()?;
    let tail = &readings[readings.len() - 5..];
    println!("last smoothed readings: {tail:.4?}");

    let table = PropertyTable::friction().select(&["snow", "ice", "wood"])?;
    let prior = init_product_prior(&DirichletParams::uniform(3), &table, DEFAULT_C_CONST)?.prior;
    let (post, diag) = sequential_update_with(&prior, tail, &UpdateOptions::with_mode(ProjectionMode::Corrected))?;
    for (name, (a, n)) in table.class_names().iter().zip(post.a().alpha().iter().zip(post.nig())) {
        println!("{name:>5}: a {a:.3}, tau {:.4}", n.tau);
    }
    println!("beta clamps {}, singular fallbacks {}", diag.beta_clamps, diag.singular_fallbacks);
    Ok(())
}
