//! Static versus dynamic gait from the expected friction of a patch.

use semprop::harness::{gait_decision, run_gait_experiment, ExperimentBody, ScenarioConfig, DEFAULT_GAIT_THRESHOLD};

fn main() -> semprop::Result<()> {
    let mut config = ScenarioConfig::builtin("gait")?;
    config.gait.as_mut().expect("gait section").measurements = vec![0.139, 0.25, 0.39, 0.628];
    let report = run_gait_experiment(&config)?;
    let ExperimentBody::Gait { trials, .. } = report.body else {
        unreachable!("gait runner returns a gait body");
    };
    println!("prior E[psi] = {:.4} -> {}", trials[0].e_psi_prior, trials[0].decision_prior);
    for t in &trials {
        println!("reading {:.3}: E[psi] {:.4} -> {}", t.psi, t.e_psi_posterior, t.decision);
        assert_eq!(t.decision, gait_decision(t.e_psi_posterior, DEFAULT_GAIT_THRESHOLD));
    }
    Ok(())
}
