//! Synthetic scenes, experiment protocols, metrics and report output.

mod config;
mod confusion;
mod correction;
mod door;
mod gait;
mod metrics;
mod report;
mod scene;

pub use config::{
    CameraConfig, ClassifierConfig, CorrectionConfig, DoorConfig, GaitConfig, OutputConfig, PriorConfig,
    RegionConfig, RegionSelection, ScenarioConfig, SceneConfig, TableConfig, CONFIG_VERSION,
};
pub use confusion::{ConfusionMatrix, LabelSampler};
pub use correction::{
    prior_grid, run_correction_experiment, trial_rng, CorrectionSummary, CorrectionTrial, MeasurementRecord,
};
pub use door::{run_door_scenario, DoorStep, DoorSummary};
pub use gait::{gait_decision, run_gait_experiment, GaitDecision, GaitTrial, DEFAULT_GAIT_THRESHOLD};
pub use metrics::{compute_metrics, ClassMap, MetricsRecord, ProbabilityMap, Psnr, ScoringInput, BCE_CLAMP, SSIM_WINDOW};
pub use report::{
    emit_report, load_report, psi_grid, table_range, Counters, DensityCurve, ExperimentBody, ExperimentReport,
    SimulateSummary, REPORT_VERSION,
};
pub use scene::{downward_pose, generate_scene, GeneratedScene, SceneLayout, SceneRegion};

use crate::error::Result;
use crate::map::VoxelGrid;

/// Output of [`run_simulation`]: the report plus the artefacts behind it.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub report: ExperimentReport,
    pub scene: GeneratedScene,
    pub grid: VoxelGrid,
}

/// Renders the scene with the run seed (trial stream 0), fuses the frames
/// and scores the fused map against the ground truth.
pub fn run_simulation(config: &ScenarioConfig) -> Result<SimulationRun> {
    let table = config.resolve_table()?;
    let confusion = config.confusion(table.len())?;
    let mut rng = trial_rng(config.seed, 0);
    let scene = generate_scene(config, &table, &confusion, &mut rng)?;
    let grid = scene.fuse(&table)?;
    let probs = scene.layout.probability_map(&grid)?;
    let metrics = compute_metrics(&probs, &scene.layout.truth)?;
    let points = scene
        .frames
        .iter()
        .map(|(f, _)| {
            (0..f.height)
                .step_by(scene.stride)
                .flat_map(|v| (0..f.width).step_by(scene.stride).map(move |u| (u, v)))
                .filter(|&(u, v)| f.labels[v * f.width + u] != crate::map::NO_LABEL)
                .count()
        })
        .sum();
    let report = ExperimentReport {
        version: REPORT_VERSION,
        config_hash: config.hash(),
        seed: config.seed,
        mode: config.mode,
        classes: table.class_names(),
        counters: Counters::default(),
        body: ExperimentBody::Simulate {
            summary: SimulateSummary {
                metrics,
                frames: scene.frames.len(),
                points,
                truth: scene.layout.truth.labels.clone(),
                class_map: probs.argmax_map().labels,
            },
        },
        densities: Vec::new(),
        dataset: None,
    };
    Ok(SimulationRun { report, scene, grid })
}
