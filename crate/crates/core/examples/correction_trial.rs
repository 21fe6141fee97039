//! Vision prior corrected by haptic readings on misclassified regions.

use semprop::harness::{run_correction_experiment, ExperimentBody, ScenarioConfig};

fn main() -> semprop::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/correct_vision.toml");
    let mut config = ScenarioConfig::load(std::path::Path::new(path))?;
    config.correction.as_mut().expect("correction section").trials = 10;
    let report = run_correction_experiment(&config)?;
    let ExperimentBody::Correct { summary, trials } = report.body else {
        unreachable!("correction runner returns a correction body");
    };
    for t in &trials {
        println!(
            "trial {}: {} misclassified regions, accuracy {:.3} -> {:.3}{}",
            t.trial,
            t.misclassified_regions,
            t.prior_metrics.accuracy,
            t.posterior_metrics.accuracy,
            if t.flipped { " (flip)" } else { "" }
        );
        for m in &t.measurements {
            println!(
                "    {} psi {:.3}: argmax {} -> {} (true {})",
                m.region, m.psi, m.prior_argmax, m.posterior_argmax, m.true_class
            );
        }
    }
    println!(
        "corrected {}/{} readings, mean accuracy {:.3} -> {:.3}",
        summary.corrected_measurements, summary.measurements, summary.mean_accuracy_prior, summary.mean_accuracy_posterior
    );
    Ok(())
}
