//! Push/pull door model: how a strong pull reshapes the bimodal prior.

use semprop::harness::{run_door_scenario, ExperimentBody, ScenarioConfig};
use semprop::moments::ProjectionMode;

fn main() -> semprop::Result<()> {
    for mode in [ProjectionMode::Paper, ProjectionMode::Corrected] {
        let mut config = ScenarioConfig::builtin("door")?;
        config.mode = mode;
        config.door.as_mut().expect("door section").measurements = vec![57.0, 21.0, 19.5];
        let ExperimentBody::Door { summary, steps } = run_door_scenario(&config)?.body else {
            unreachable!("door runner returns a door body");
        };
        println!("{mode}");
        for s in &steps {
            let psi = s.psi.map_or("prior".to_string(), |p| format!("{p:+.1} N"));
            println!(
                "  {psi:>8}: weights push {:.3} / pull {:.3}, pull tau {:.2}, pull E[var] {:.2}",
                s.weights[0], s.weights[1], s.nig[1].tau, s.variances[1]
            );
        }
        println!("  final weight ratio {:.3}", summary.weight_ratio);
    }
    Ok(())
}
