use std::path::Path;
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semprop::conjugate::{GaussianMixture, GaussianParams};
use semprop::harness::{
    emit_report, generate_scene, load_report, psi_grid, run_correction_experiment, run_door_scenario,
    run_gait_experiment, ConfusionMatrix, DensityCurve, ExperimentBody, MetricsRecord, Psnr, ScenarioConfig,
    ScoringInput,
};
use serde::Deserialize;

#[derive(Deserialize)]
struct ReferenceCase {
    name: String,
    input: ScoringInput,
    expected: MetricsRecord,
}

#[derive(Deserialize)]
struct ReferenceFile {
    cases: Vec<ReferenceCase>,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

#[test]
fn metrics_match_reference_script() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/metrics_reference.json");
    let file: ReferenceFile = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!(file.cases.len() >= 3);
    for c in &file.cases {
        let got = c.input.score().unwrap();
        let want = &c.expected;
        assert!(close(got.accuracy, want.accuracy), "{}: accuracy", c.name);
        assert!(close(got.bce, want.bce), "{}: bce {} vs {}", c.name, got.bce, want.bce);
        assert!(close(got.bce_per_cell, want.bce_per_cell), "{}: bce per cell", c.name);
        assert!(close(got.mse, want.mse), "{}: mse", c.name);
        match (got.psnr, want.psnr) {
            (Psnr(a), Psnr(b)) if a.is_infinite() || b.is_infinite() => assert_eq!(a, b, "{}: psnr", c.name),
            (Psnr(a), Psnr(b)) => assert!(close(a, b), "{}: psnr", c.name),
        }
        assert!(close(got.ssim, want.ssim), "{}: ssim {} vs {}", c.name, got.ssim, want.ssim);
    }
}

#[test]
fn uniform_classifier_spreads_labels_evenly() {
    let mut cfg = ScenarioConfig::builtin("simulate").unwrap();
    cfg.scene.as_mut().unwrap().camera.as_mut().unwrap().frames = 40;
    let table = cfg.resolve_table().unwrap();
    let scene = generate_scene(&cfg, &table, &ConfusionMatrix::uniform(3), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let mut counts = [0usize; 3];
    for (f, _) in &scene.frames {
        for &l in &f.labels {
            if l != 0 {
                counts[l as usize - 1] += 1;
            }
        }
    }
    let total: usize = counts.iter().sum();
    assert!(total >= 100_000, "only {total} labelled pixels");
    for c in counts {
        assert!((c as f64 / total as f64 - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
    }
}

#[test]
fn empty_schedule_reproduces_vision_baseline() {
    for name in ["correct", "correct_vision"] {
        let mut cfg = match name {
            "correct" => ScenarioConfig::builtin(name).unwrap(),
            _ => ScenarioConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/correct_vision.toml")).unwrap(),
        };
        let c = cfg.correction.as_mut().unwrap();
        c.measurements = 0;
        c.trials = 5;
        let report = run_correction_experiment(&cfg).unwrap();
        let ExperimentBody::Correct { trials, summary } = report.body else {
            panic!("wrong body")
        };
        assert_eq!(summary.measurements, 0);
        for t in trials {
            assert_eq!(t.prior_metrics, t.posterior_metrics);
            assert_eq!(t.prior_class_map, t.posterior_class_map);
        }
    }
}

#[test]
fn vision_correction_improves_with_weak_evidence() {
    let cfg = ScenarioConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/correct_vision.toml")).unwrap();
    let report = run_correction_experiment(&cfg).unwrap();
    let ExperimentBody::Correct { summary, trials } = report.body else {
        panic!("wrong body")
    };
    assert!(summary.mean_accuracy_posterior > summary.mean_accuracy_prior);
    for t in trials.iter().filter(|t| t.flipped) {
        assert!(t.posterior_metrics.accuracy > t.prior_metrics.accuracy, "trial {}", t.trial);
    }
}

#[test]
fn reports_are_byte_identical_and_round_trip() {
    let mut cfg = ScenarioConfig::builtin("correct").unwrap();
    cfg.correction.as_mut().unwrap().trials = 20;
    let dir = tempfile::tempdir().unwrap();
    let a = run_correction_experiment(&cfg).unwrap();
    let b = run_correction_experiment(&cfg).unwrap();
    let pa = emit_report(&a, &dir.path().join("a")).unwrap();
    let pb = emit_report(&b, &dir.path().join("b")).unwrap();
    for (x, y) in pa.iter().zip(&pb) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
    }
    assert_eq!(load_report(&pa[0]).unwrap(), a);

    for report in [
        run_gait_experiment(&ScenarioConfig::builtin("gait").unwrap()).unwrap(),
        run_door_scenario(&ScenarioConfig::builtin("door").unwrap()).unwrap(),
    ] {
        let paths = emit_report(&report, &dir.path().join("other")).unwrap();
        assert_eq!(load_report(&paths[0]).unwrap(), report);
    }
}

#[test]
fn seed_changes_the_report() {
    let mut cfg = ScenarioConfig::builtin("correct").unwrap();
    cfg.correction.as_mut().unwrap().trials = 3;
    let a = run_correction_experiment(&cfg).unwrap();
    cfg.seed += 1;
    let b = run_correction_experiment(&cfg).unwrap();
    assert_ne!(a.config_hash, b.config_hash);
    assert_ne!(a.body, b.body);
}

#[test]
fn density_curve_peaks_at_the_mean() {
    let m = GaussianMixture::single(GaussianParams::new(0.5, 0.01).unwrap());
    let grid = psi_grid(0.0, 1.0, 101);
    let c = DensityCurve::sample("n", &m, &grid);
    let peak = c
        .density
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert_eq!(c.psi[peak], 0.5);
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semprop"))
}

#[test]
fn cli_subcommands_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["simulate", "gait", "door"] {
        let out = dir.path().join(sub);
        let status = cli().args(["--out", out.to_str().unwrap(), "--mode", "corrected", sub]).status().unwrap();
        assert!(status.success(), "{sub}");
        assert!(out.join("report.json").exists());
        assert!(out.join("metrics.csv").exists());
        assert!(out.join("density.csv").exists());
    }

    let out = dir.path().join("correct");
    let status = cli()
        .args(["--seed", "77", "--out", out.to_str().unwrap(), "correct"])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(load_report(&out.join("report.json")).unwrap().seed, 77);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "version = 1\nseed = 1\n[scene]\nwidth = 2\nheight = 2\nbackground = \"lava\"\n").unwrap();
    let o = cli().args(["--config", bad.to_str().unwrap(), "simulate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scene.background"));

    let o = cli().args(["--config", "/nonexistent/cfg.toml", "simulate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(4));

    let input = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/metrics_reference.json");
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(input).unwrap()).unwrap();
    let one = dir.path().join("one.json");
    std::fs::write(&one, file["cases"][3]["input"].to_string()).unwrap();
    let out = dir.path().join("metrics");
    let status = cli()
        .args(["--out", out.to_str().unwrap(), "metrics", "--input", one.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let m: MetricsRecord = serde_json::from_str(&std::fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert!(m.psnr.is_infinite());
}

#[test]
fn oracle_command_regenerates_the_committed_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let status = cli().args(["--out", dir.path().to_str().unwrap(), "oracle"]).status().unwrap();
    assert!(status.success());
    let fresh = std::fs::read(dir.path().join("golden_moments.json")).unwrap();
    let committed = std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden_moments.json")).unwrap();
    assert_eq!(fresh, committed);
}
