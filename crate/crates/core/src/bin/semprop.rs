use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use semprop::harness::{
    emit_report, run_correction_experiment, run_door_scenario, run_gait_experiment, run_simulation, ExperimentBody,
    ExperimentReport, ScenarioConfig, ScoringInput,
};
use semprop::map::{save_snapshot, write_frames};
use semprop::moments::ProjectionMode;
use semprop::oracle::{write_fixture, QuadratureSpec};
use semprop::{Error, Result};

/// Semantic-class and physical-property fusion experiments.
#[derive(Debug, Parser)]
#[command(name = "semprop", version)]
struct Cli {
    /// Scenario file (TOML); the command's built-in scenario when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Moment-matching mode.
    #[arg(long, global = true, value_parser = ["paper", "corrected"])]
    mode: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a scene, fuse the frames and score the map.
    Simulate {
        /// Also write the rendered frames and their manifest.
        #[arg(long)]
        save_frames: bool,
    },
    /// Misclassified-region correction trials.
    Correct,
    /// Static/dynamic gait decisions from friction readings.
    Gait,
    /// Sequential push/pull door readings.
    Door,
    /// Regenerate the golden moment fixture by quadrature.
    Oracle,
    /// Score a prediction file against its truth.
    Metrics {
        /// JSON file with `pred` and `truth` maps.
        #[arg(long)]
        input: PathBuf,
    },
}

fn load_config(cli: &Cli, builtin: &str) -> Result<ScenarioConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::builtin(builtin)?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = &cli.mode {
        cfg.mode = mode.parse::<ProjectionMode>().map_err(|e| Error::Config {
            path: "--mode".into(),
            message: e.to_string(),
        })?;
    }
    Ok(cfg)
}

fn finish(report: &ExperimentReport, out: &Path) -> Result<()> {
    for p in emit_report(report, out)? {
        println!("wrote {}", p.display());
    }
    let c = &report.counters;
    println!(
        "beta clamps {}, singular fallbacks {}, warnings {}",
        c.beta_clamps, c.singular_fallbacks, c.warning_count
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate { save_frames } => {
            let cfg = load_config(cli, "simulate")?;
            let run = run_simulation(&cfg)?;
            if let ExperimentBody::Simulate { summary } = &run.report.body {
                let m = &summary.metrics;
                println!(
                    "{} frames, {} labelled points: accuracy {:.4}, bce {:.4}, psnr {}, ssim {:.4}",
                    summary.frames, summary.points, m.accuracy, m.bce, m.psnr, m.ssim
                );
            }
            std::fs::create_dir_all(&cli.out).map_err(|e| Error::Io {
                path: cli.out.clone(),
                source: e,
            })?;
            let grid_path = cli.out.join("grid.json");
            save_snapshot(&run.grid, &grid_path)?;
            println!("wrote {}", grid_path.display());
            if *save_frames {
                let manifest = write_frames(&cli.out.join("frames"), &run.scene.camera, &run.scene.frames)?;
                println!("wrote {}", manifest.display());
            }
            finish(&run.report, &cli.out)
        }
        Command::Correct => {
            let cfg = load_config(cli, "correct")?;
            let report = run_correction_experiment(&cfg)?;
            if let ExperimentBody::Correct { summary, .. } = &report.body {
                println!(
                    "{} trials, {} measurements: true class is argmax after {} ({:.3}); accuracy {:.4} -> {:.4}",
                    summary.trials,
                    summary.measurements,
                    summary.corrected_measurements,
                    summary.corrected_rate,
                    summary.mean_accuracy_prior,
                    summary.mean_accuracy_posterior
                );
            }
            finish(&report, &cli.out)
        }
        Command::Gait => {
            let cfg = load_config(cli, "gait")?;
            let report = run_gait_experiment(&cfg)?;
            if let ExperimentBody::Gait { threshold, trials } = &report.body {
                for t in trials {
                    println!(
                        "psi {:.3}: E[psi] {:.4} -> {:.4} (threshold {threshold}) => {}",
                        t.psi, t.e_psi_prior, t.e_psi_posterior, t.decision
                    );
                }
            }
            finish(&report, &cli.out)
        }
        Command::Door => {
            let cfg = load_config(cli, "door")?;
            let report = run_door_scenario(&cfg)?;
            if let ExperimentBody::Door { steps, summary } = &report.body {
                for s in steps {
                    println!("step {}: weights {:?}, E[sigma^2] {:?}", s.step, s.weights, s.variances);
                }
                println!("final weight ratio {:.4}", summary.weight_ratio);
            }
            finish(&report, &cli.out)
        }
        Command::Oracle => {
            std::fs::create_dir_all(&cli.out).map_err(|e| Error::Io {
                path: cli.out.clone(),
                source: e,
            })?;
            let path = cli.out.join("golden_moments.json");
            let fixture = write_fixture(&path, &QuadratureSpec::default())?;
            println!("wrote {} ({} cases)", path.display(), fixture.cases.len());
            Ok(())
        }
        Command::Metrics { input } => {
            let m = ScoringInput::load(input)?.score()?;
            std::fs::create_dir_all(&cli.out).map_err(|e| Error::Io {
                path: cli.out.clone(),
                source: e,
            })?;
            let path = cli.out.join("metrics.json");
            let mut json = serde_json::to_string_pretty(&m).expect("metrics serialise");
            json.push('\n');
            std::fs::write(&path, json).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            println!(
                "accuracy {}, bce {}, mse {}, psnr {}, ssim {}",
                m.accuracy, m.bce, m.mse, m.psnr, m.ssim
            );
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
