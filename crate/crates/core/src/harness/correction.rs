use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{PriorConfig, RegionSelection, ScenarioConfig};
use super::metrics::{compute_metrics, MetricsRecord};
use super::report::{psi_grid, table_range, Counters, DensityCurve, ExperimentBody, ExperimentReport, REPORT_VERSION};
use super::scene::{generate_scene, SceneLayout, SceneRegion};
use crate::conjugate::{argmax, expected_mixture, DirichletParams, ProductPrior};
use crate::error::{Error, Result};
use crate::map::VoxelGrid;
use crate::moments::Diagnostics;
use crate::property::{build_likelihood, PropertyTable};

/// One simulated friction reading fused into a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub region: String,
    pub true_class: usize,
    pub psi: f64,
    /// Region-averaged belief the update started from.
    pub prior_alpha: Vec<f64>,
    pub prior_argmax: usize,
    pub posterior_argmax: usize,
    pub posterior: ProductPrior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTrial {
    pub trial: usize,
    pub misclassified_regions: usize,
    pub measurements: Vec<MeasurementRecord>,
    /// At least one region was measured and every measured region now has
    /// its true class as argmax.
    pub flipped: bool,
    pub prior_metrics: MetricsRecord,
    pub posterior_metrics: MetricsRecord,
    pub prior_class_map: Vec<usize>,
    pub posterior_class_map: Vec<usize>,
    pub counters: Counters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionSummary {
    pub trials: usize,
    pub measured_trials: usize,
    pub measurements: usize,
    /// Measurements whose region ended with the true class as argmax.
    pub corrected_measurements: usize,
    pub corrected_rate: f64,
    pub flipped_trials: usize,
    /// Flipped trials whose accuracy did not strictly improve.
    pub flipped_without_improvement: Vec<usize>,
    /// Trials whose accuracy dropped.
    pub accuracy_drops: Vec<usize>,
    pub mean_accuracy_prior: f64,
    pub mean_accuracy_posterior: f64,
}

/// Generator of trial `t`: ChaCha8 keyed by the run seed, stream `t`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Map holding the pre-measurement class belief of every scene cell.
pub fn prior_grid(
    config: &ScenarioConfig,
    table: &PropertyTable,
    layout: &SceneLayout,
    rng: &mut ChaCha8Rng,
) -> Result<VoxelGrid> {
    let mut grid = match &config.prior {
        PriorConfig::Vision => {
            let confusion = config.confusion(table.len())?;
            generate_scene(config, table, &confusion, rng)?.fuse(table)?
        }
        PriorConfig::Fixed { favored, ratio } => {
            let fav = table.index_of(favored).ok_or_else(|| Error::Config {
                path: "prior.favored".into(),
                message: format!("unknown class `{favored}`"),
            })?;
            let mut alpha = vec![1.0; table.len()];
            alpha[fav.0] = *ratio;
            let alpha = DirichletParams::new(alpha)?;
            let mut g = layout.empty_grid(table)?;
            for id in layout.cell_ids() {
                g.set_alpha(id, alpha.clone())?;
            }
            g
        }
    };
    if let Some(p) = config.init {
        grid.set_init_policy(p);
    }
    Ok(grid)
}

/// Sum of the effective beliefs over the region.
fn region_alpha(grid: &VoxelGrid, region: &SceneRegion) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; grid.k()];
    for id in region.mask.iter() {
        for (s, a) in sum.iter_mut().zip(grid.effective_alpha(id)?.alpha()) {
            *s += a;
        }
    }
    Ok(sum)
}

fn run_trial(config: &ScenarioConfig, table: &PropertyTable, layout: &SceneLayout, trial: usize) -> Result<CorrectionTrial> {
    let correction = config.require_correction()?;
    let opts = config.update_options();
    let mut rng = trial_rng(config.seed, trial);
    let mut grid = prior_grid(config, table, layout, &mut rng)?;

    let prior_probs = layout.probability_map(&grid)?;
    let prior_metrics = compute_metrics(&prior_probs, &layout.truth)?;

    let mut misclassified = Vec::new();
    for r in &layout.regions {
        if argmax(&region_alpha(&grid, r)?) != r.class.0 {
            misclassified.push(r);
        }
    }
    let count = correction.measurements.min(misclassified.len());
    let chosen: Vec<&SceneRegion> = match correction.selection {
        RegionSelection::RandomMisclassified => sample(&mut rng, misclassified.len(), count)
            .into_iter()
            .map(|i| misclassified[i])
            .collect(),
        RegionSelection::AllMisclassified => misclassified.iter().take(count).copied().collect(),
    };

    let mut diag = Diagnostics::default();
    let mut measurements = Vec::with_capacity(chosen.len());
    for region in chosen {
        let truth = table.entries()[region.class.0].params;
        let psi = Normal::new(truth.mu, truth.sd())
            .map_err(|e| Error::domain(e.to_string()))?
            .sample(&mut rng);
        let n = region.mask.len() as f64;
        let prior_alpha: Vec<f64> = region_alpha(&grid, region)?.iter().map(|a| a / n).collect();
        diag.merge(grid.apply_property_measurement(&region.mask, psi, table, &opts)?);
        let first = region.mask.iter().next().expect("regions are non-empty");
        measurements.push(MeasurementRecord {
            region: region.name.clone(),
            true_class: region.class.0,
            psi,
            prior_argmax: argmax(&prior_alpha),
            prior_alpha,
            posterior_argmax: argmax(&region_alpha(&grid, region)?),
            posterior: grid.local_psi(first).expect("measured region has a prior").clone(),
        });
    }

    let posterior_probs = layout.probability_map(&grid)?;
    let posterior_metrics = compute_metrics(&posterior_probs, &layout.truth)?;
    Ok(CorrectionTrial {
        trial,
        misclassified_regions: misclassified.len(),
        flipped: !measurements.is_empty() && measurements.iter().all(|m| m.posterior_argmax == m.true_class),
        measurements,
        prior_metrics,
        posterior_metrics,
        prior_class_map: prior_probs.argmax_map().labels,
        posterior_class_map: posterior_probs.argmax_map().labels,
        counters: Counters::from(&diag),
    })
}

/// Runs the configured number of independent trials in parallel.
///
/// Each trial builds its own map from its own generator, finds the regions
/// whose averaged belief disagrees with the ground truth, draws one reading
/// per selected region from the true class's table Gaussian and fuses it.
pub fn run_correction_experiment(config: &ScenarioConfig) -> Result<ExperimentReport> {
    let correction = config.require_correction()?;
    let table = config.resolve_table()?;
    let layout = SceneLayout::from_config(config.require_scene()?, &table)?;

    let trials: Vec<CorrectionTrial> = (0..correction.trials)
        .into_par_iter()
        .map(|t| {
            run_trial(config, &table, &layout, t).map_err(|e| Error::AtTrial {
                index: t,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut counters = Counters::default();
    for t in &trials {
        counters.beta_clamps += t.counters.beta_clamps;
        counters.singular_fallbacks += t.counters.singular_fallbacks;
        counters.warning_count += t.counters.warning_count;
        counters.warnings.extend(t.counters.warnings.iter().cloned());
    }

    let n = trials.len() as f64;
    let measurements: usize = trials.iter().map(|t| t.measurements.len()).sum();
    let corrected = trials
        .iter()
        .flat_map(|t| &t.measurements)
        .filter(|m| m.posterior_argmax == m.true_class)
        .count();
    let summary = CorrectionSummary {
        trials: trials.len(),
        measured_trials: trials.iter().filter(|t| !t.measurements.is_empty()).count(),
        measurements,
        corrected_measurements: corrected,
        corrected_rate: if measurements == 0 {
            0.0
        } else {
            corrected as f64 / measurements as f64
        },
        flipped_trials: trials.iter().filter(|t| t.flipped).count(),
        flipped_without_improvement: trials
            .iter()
            .filter(|t| t.flipped && !(t.posterior_metrics.accuracy > t.prior_metrics.accuracy))
            .map(|t| t.trial)
            .collect(),
        accuracy_drops: trials
            .iter()
            .filter(|t| t.posterior_metrics.accuracy < t.prior_metrics.accuracy)
            .map(|t| t.trial)
            .collect(),
        mean_accuracy_prior: trials.iter().map(|t| t.prior_metrics.accuracy).sum::<f64>() / n,
        mean_accuracy_posterior: trials.iter().map(|t| t.posterior_metrics.accuracy).sum::<f64>() / n,
    };

    let mut densities = Vec::new();
    if let Some(m) = trials.iter().flat_map(|t| &t.measurements).next() {
        let [lo, hi] = config.output.psi_range.unwrap_or_else(|| table_range(&table));
        let grid = psi_grid(lo, hi, config.output.density_points);
        let prior = build_likelihood(&DirichletParams::new(m.prior_alpha.clone())?, &table)?;
        densities.push(DensityCurve::sample(format!("prior_{}", m.region), &prior, &grid));
        densities.push(DensityCurve::sample(
            format!("posterior_{}", m.region),
            &expected_mixture(&m.posterior)?,
            &grid,
        ));
    }

    Ok(ExperimentReport {
        version: REPORT_VERSION,
        config_hash: config.hash(),
        seed: config.seed,
        mode: config.mode,
        classes: table.class_names(),
        counters,
        body: ExperimentBody::Correct { summary, trials },
        densities,
        dataset: None,
    })
}
