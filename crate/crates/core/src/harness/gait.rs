use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::report::{psi_grid, table_range, Counters, DensityCurve, ExperimentBody, ExperimentReport, REPORT_VERSION};
use crate::conjugate::{expected_mixture, DirichletParams};
use crate::error::{Error, Result};
use crate::map::{RegionMask, VoxelGrid};
use crate::moments::Diagnostics;
use crate::property::build_likelihood;

/// Friction level at or below which the robot switches to a static gait.
pub const DEFAULT_GAIT_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaitDecision {
    Static,
    Dynamic,
}

impl fmt::Display for GaitDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GaitDecision::Static => "static",
            GaitDecision::Dynamic => "dynamic",
        })
    }
}

/// `Static` iff `e_psi ≤ threshold`.
pub fn gait_decision(e_psi: f64, threshold: f64) -> GaitDecision {
    if e_psi <= threshold {
        GaitDecision::Static
    } else {
        GaitDecision::Dynamic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitTrial {
    pub trial: usize,
    pub psi: f64,
    pub e_psi_prior: f64,
    pub e_psi_posterior: f64,
    pub decision_prior: GaitDecision,
    pub decision: GaitDecision,
    pub class_probs_posterior: Vec<f64>,
    pub a_posterior: Vec<f64>,
}

/// One fresh patch per configured reading: query `E[ψ]`, fuse the reading,
/// query again and decide.
pub fn run_gait_experiment(config: &ScenarioConfig) -> Result<ExperimentReport> {
    let gait = config.require_gait()?;
    let table = config.resolve_table()?;
    let opts = config.update_options();
    let alpha = match &gait.alpha {
        Some(a) => DirichletParams::new(a.clone()).map_err(|e| Error::Config {
            path: "gait.alpha".into(),
            message: e.to_string(),
        })?,
        None => DirichletParams::uniform(table.len()),
    };
    if alpha.k() != table.len() {
        return Err(Error::Config {
            path: "gait.alpha".into(),
            message: format!("{} entries for {} classes", alpha.k(), table.len()),
        });
    }
    let range = config.output.psi_range.unwrap_or_else(|| table_range(&table));
    let grid_points = psi_grid(range[0], range[1], config.output.density_points);

    let mut diag = Diagnostics::default();
    let mut trials = Vec::with_capacity(gait.measurements.len());
    let mut densities = vec![DensityCurve::sample(
        "prior",
        &build_likelihood(&alpha, &table)?,
        &grid_points,
    )];
    for (trial, &psi) in gait.measurements.iter().enumerate() {
        let mut run = || -> Result<GaitTrial> {
            let mut grid = VoxelGrid::with_table(table.clone(), crate::map::DEFAULT_RESOLUTION, Default::default())?;
            if let Some(p) = config.init {
                grid.set_init_policy(p);
            }
            let region = RegionMask::new((0..gait.patch_cells as i64).map(|x| [x, 0, 0]));
            for id in region.iter() {
                grid.set_alpha(*id, alpha.clone())?;
            }
            let e_psi_prior = grid.expected_property(&region)?;
            diag.merge(grid.apply_property_measurement(&region, psi, &table, &opts)?);
            let e_psi_posterior = grid.expected_property(&region)?;
            let first = region.iter().next().expect("non-empty patch");
            let posterior = grid.local_psi(first).expect("measured cell has a prior").clone();
            densities.push(DensityCurve::sample(
                format!("posterior_psi{trial}"),
                &expected_mixture(&posterior)?,
                &grid_points,
            ));
            Ok(GaitTrial {
                trial,
                psi,
                e_psi_prior,
                e_psi_posterior,
                decision_prior: gait_decision(e_psi_prior, gait.threshold),
                decision: gait_decision(e_psi_posterior, gait.threshold),
                class_probs_posterior: grid.query_cell(first)?.class.probs().to_vec(),
                a_posterior: posterior.a().alpha().to_vec(),
            })
        };
        trials.push(run().map_err(|e| Error::AtTrial {
            index: trial,
            source: Box::new(e),
        })?);
    }
    Ok(ExperimentReport {
        version: REPORT_VERSION,
        config_hash: config.hash(),
        seed: config.seed,
        mode: config.mode,
        classes: table.class_names(),
        counters: Counters::from(&diag),
        body: ExperimentBody::Gait {
            threshold: gait.threshold,
            trials,
        },
        densities,
        dataset: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_is_static() {
        assert_eq!(gait_decision(0.25, 0.25), GaitDecision::Static);
        assert_eq!(gait_decision(0.2500001, 0.25), GaitDecision::Dynamic);
        assert_eq!(gait_decision(0.1, 0.25), GaitDecision::Static);
    }

    #[test]
    fn builtin_gait_trials() {
        let r = run_gait_experiment(&ScenarioConfig::builtin("gait").unwrap()).unwrap();
        let ExperimentBody::Gait { trials, .. } = r.body else {
            panic!("wrong body")
        };
        assert_eq!(trials[0].decision, GaitDecision::Static);
        assert_eq!(trials[1].decision, GaitDecision::Dynamic);
        // the ambiguous prior sits above the threshold
        assert_eq!(trials[0].decision_prior, GaitDecision::Dynamic);
    }
}
