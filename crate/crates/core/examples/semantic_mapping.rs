//! Build a voxel map from synthetic labeled depth frames, then refine one
//! region with a property measurement.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semprop::harness::{compute_metrics, generate_scene, ScenarioConfig};

fn main() -> semprop::Result<()> {
    let config = ScenarioConfig::builtin("simulate")?;
    let table = config.resolve_table()?;
    let confusion = config.confusion(table.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scene = generate_scene(&config, &table, &confusion, &mut rng)?;

    let mut grid = scene.fuse(&table)?;
    println!("{} frames fused into {} cells", scene.frames.len(), grid.len());
    let pred = scene.layout.probability_map(&grid)?;
    let metrics = compute_metrics(&pred, &scene.layout.truth)?;
    println!("vision only: accuracy {:.3}, bce {:.4}", metrics.accuracy, metrics.bce);

    let region = &scene.layout.regions[0];
    let truth = table.params(region.class);
    println!(
        "region {} ({}): E[psi] before {:.4}",
        region.name,
        table.entries()[region.class.get()].class,
        grid.expected_property(&region.mask)?
    );
    grid.apply_property_measurement(&region.mask, truth.mu, &table, &config.update_options())?;
    println!("after a reading at {:.3}: E[psi] {:.4}", truth.mu, grid.expected_property(&region.mask)?);
    let metrics = compute_metrics(&scene.layout.probability_map(&grid)?, &scene.layout.truth)?;
    println!("after the measurement: accuracy {:.3}", metrics.accuracy);
    Ok(())
}
