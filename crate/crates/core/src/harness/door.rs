use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::report::{psi_grid, table_range, Counters, DensityCurve, ExperimentBody, ExperimentReport, REPORT_VERSION};
use crate::conjugate::{expected_mixture, DirichletParams, NigParams, ProductPrior};
use crate::error::{Error, Result};
use crate::moments::{branch_responsibilities, exact_posterior_with, update_once, Diagnostics};
use crate::property::{init_with_policy, InitPolicy};

/// State after `step` measurements (step 0 is the initial prior).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoorStep {
    pub step: usize,
    pub psi: Option<f64>,
    pub a: Vec<f64>,
    /// `aᵢ / Σa`.
    pub weights: Vec<f64>,
    pub nig: Vec<NigParams>,
    /// `E[σ²] = γ/(β − 1)` per mode.
    pub variances: Vec<f64>,
    /// Branch responsibilities of the update that produced this step.
    pub responsibilities: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoorSummary {
    pub final_weights: Vec<f64>,
    /// Largest over smallest final weight.
    pub weight_ratio: f64,
    pub all_positive: bool,
}

fn record(step: usize, psi: Option<f64>, prior: &ProductPrior, resp: Option<Vec<f64>>) -> DoorStep {
    let a = prior.a().alpha().to_vec();
    let total: f64 = a.iter().sum();
    DoorStep {
        step,
        psi,
        weights: a.iter().map(|x| x / total).collect(),
        a,
        nig: prior.nig().to_vec(),
        variances: prior.nig().iter().map(|n| n.mean_var().unwrap_or(f64::NAN)).collect(),
        responsibilities: resp,
    }
}

/// Initialises the signed-force prior and applies the configured readings
/// in order, each posterior becoming the next prior.
///
/// The table rows have signed means, so initialisation defaults to the
/// moment-preserving policy.
pub fn run_door_scenario(config: &ScenarioConfig) -> Result<ExperimentReport> {
    let door = config.require_door()?;
    let table = config.resolve_table()?;
    let opts = config.update_options();
    let alpha = match &door.alpha {
        Some(a) => DirichletParams::new(a.clone())?,
        None => DirichletParams::uniform(table.len()),
    };
    if alpha.k() != table.len() {
        return Err(Error::Config {
            path: "door.alpha".into(),
            message: format!("{} entries for {} classes", alpha.k(), table.len()),
        });
    }
    let policy = config.init.unwrap_or(InitPolicy::MomentPreserving);
    let init = init_with_policy(&alpha, &table, policy, &opts.floor)?;
    let mut diag = Diagnostics {
        beta_clamps: init.clamp_count(),
        ..Diagnostics::default()
    };

    let [mut lo, mut hi] = table_range(&table);
    for &m in &door.measurements {
        lo = lo.min(m - 5.0);
        hi = hi.max(m + 5.0);
    }
    let [lo, hi] = config.output.psi_range.unwrap_or([lo, hi]);
    let grid = psi_grid(lo, hi, config.output.density_points);

    let mut current = init.prior;
    let mut steps = vec![record(0, None, &current, None)];
    let mut densities = vec![DensityCurve::sample("step0", &expected_mixture(&current)?, &grid)];
    for (i, &psi) in door.measurements.iter().enumerate() {
        let at = |e: Error| Error::AtMeasurement {
            index: i,
            source: Box::new(e),
        };
        let resp = branch_responsibilities(&exact_posterior_with(&current, psi, opts.weighting).map_err(at)?);
        current = update_once(&current, psi, &opts, &mut diag).map_err(at)?;
        steps.push(record(i + 1, Some(psi), &current, Some(resp)));
        densities.push(DensityCurve::sample(
            format!("step{}", i + 1),
            &expected_mixture(&current).map_err(at)?,
            &grid,
        ));
    }

    let final_weights = steps.last().expect("step 0 recorded").weights.clone();
    let max = final_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = final_weights.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ExperimentReport {
        version: REPORT_VERSION,
        config_hash: config.hash(),
        seed: config.seed,
        mode: config.mode,
        classes: table.class_names(),
        counters: Counters::from(&diag),
        body: ExperimentBody::Door {
            summary: DoorSummary {
                weight_ratio: max / min,
                all_positive: min > 0.0,
                final_weights,
            },
            steps,
        },
        densities,
        dataset: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::ProjectionMode;

    fn door_with(measurements: Vec<f64>) -> (DoorSummary, Vec<DoorStep>) {
        door_in(ProjectionMode::Paper, measurements)
    }

    fn door_in(mode: ProjectionMode, measurements: Vec<f64>) -> (DoorSummary, Vec<DoorStep>) {
        let mut cfg = ScenarioConfig::builtin("door").unwrap();
        cfg.mode = mode;
        cfg.door.as_mut().unwrap().measurements = measurements;
        match run_door_scenario(&cfg).unwrap().body {
            ExperimentBody::Door { summary, steps } => (summary, steps),
            _ => panic!("wrong body"),
        }
    }

    #[test]
    fn pull_at_mode_centre_keeps_rate() {
        let (_, steps) = door_with(vec![20.0]);
        let (before, after) = (&steps[0], &steps[1]);
        let prior = ProductPrior::new(DirichletParams::new(before.a.clone()).unwrap(), before.nig.clone()).unwrap();
        let exact = exact_posterior_with(&prior, 20.0, Default::default()).unwrap();
        let pull_branch = &exact.branches[1].nig_tilde;
        assert_eq!(pull_branch.gamma, before.nig[1].gamma);
        assert!(after.a[1] > before.a[1]);
        assert!(after.a[1] > after.a[0]);
    }

    #[test]
    fn alternating_pushes_and_pulls_stay_balanced() {
        let (summary, steps) = door_in(ProjectionMode::Corrected, vec![20.0, -20.0, 20.0, -20.0, 20.0, -20.0]);
        assert_eq!(steps.len(), 7);
        assert!(summary.all_positive);
        let ratio = steps[6].a[0] / steps[6].a[1];
        assert!((0.8..=1.25).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn strong_pull_keeps_both_modes() {
        let (summary, steps) = door_with(vec![57.0]);
        assert!(summary.all_positive);
        assert!(summary.weight_ratio < 2.0);
        assert!(steps[1].nig[1].gamma > steps[0].nig[1].gamma);
    }
}
