use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::correction::{CorrectionSummary, CorrectionTrial};
use super::door::{DoorStep, DoorSummary};
use super::gait::GaitTrial;
use super::metrics::MetricsRecord;
use crate::conjugate::GaussianMixture;
use crate::error::{Error, Result};
use crate::moments::{Diagnostics, ProjectionMode};
use crate::property::PropertyTable;

pub const REPORT_VERSION: u32 = 1;

/// Moment-matching activity summed over a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub beta_clamps: usize,
    pub singular_fallbacks: usize,
    pub warning_count: usize,
    pub warnings: Vec<String>,
}

impl From<&Diagnostics> for Counters {
    fn from(d: &Diagnostics) -> Self {
        Self {
            beta_clamps: d.beta_clamps,
            singular_fallbacks: d.singular_fallbacks,
            warning_count: d.warnings.len(),
            warnings: d.warnings.clone(),
        }
    }
}

/// Mixture density sampled on a ψ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub label: String,
    pub psi: Vec<f64>,
    pub density: Vec<f64>,
}

impl DensityCurve {
    pub fn sample(label: impl Into<String>, mixture: &GaussianMixture, grid: &[f64]) -> Self {
        Self {
            label: label.into(),
            psi: grid.to_vec(),
            density: grid.iter().map(|&x| mixture.pdf(x)).collect(),
        }
    }
}

/// `n` evenly spaced points over `[lo, hi]`, endpoints included.
pub fn psi_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { hi } else { lo + step * i as f64 }).collect()
}

/// `[min(μ − 4σ), max(μ + 4σ)]` over the table rows.
pub fn table_range(table: &PropertyTable) -> [f64; 2] {
    let lo = table
        .entries()
        .iter()
        .map(|e| e.params.mu - 4.0 * e.params.sd())
        .fold(f64::INFINITY, f64::min);
    let hi = table
        .entries()
        .iter()
        .map(|e| e.params.mu + 4.0 * e.params.sd())
        .fold(f64::NEG_INFINITY, f64::max);
    [lo, hi]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub metrics: MetricsRecord,
    pub frames: usize,
    pub points: usize,
    pub truth: Vec<usize>,
    pub class_map: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentBody {
    Simulate {
        summary: SimulateSummary,
    },
    Correct {
        summary: CorrectionSummary,
        trials: Vec<CorrectionTrial>,
    },
    Gait {
        threshold: f64,
        trials: Vec<GaitTrial>,
    },
    Door {
        summary: DoorSummary,
        steps: Vec<DoorStep>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub mode: ProjectionMode,
    pub classes: Vec<String>,
    pub counters: Counters,
    #[serde(flatten)]
    pub body: ExperimentBody,
    pub densities: Vec<DensityCurve>,
    /// Reserved for runs backed by recorded label data; always null here.
    pub dataset: Option<serde_json::Value>,
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<PathBuf> {
    std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else {
        x.to_string()
    }
}

fn metric_cols(prefix: &str) -> Vec<String> {
    ["accuracy", "bce", "mse", "psnr", "ssim"]
        .iter()
        .map(|m| format!("{m}_{prefix}"))
        .collect()
}

fn metric_vals(m: &MetricsRecord) -> Vec<String> {
    vec![num(m.accuracy), num(m.bce), num(m.mse), num(m.psnr.0), num(m.ssim)]
}

impl ExperimentReport {
    /// Header and rows of `metrics.csv`.
    pub fn metrics_table(&self) -> (Vec<String>, Vec<Vec<String>>) {
        match &self.body {
            ExperimentBody::Simulate { summary } => {
                let header = metric_cols("map");
                (header, vec![metric_vals(&summary.metrics)])
            }
            ExperimentBody::Correct { trials, .. } => {
                let mut header = vec!["trial".to_string()];
                header.extend(metric_cols("prior"));
                header.extend(metric_cols("posterior"));
                header.extend(["measured", "flipped"].map(String::from));
                let rows = trials
                    .iter()
                    .map(|t| {
                        let mut r = vec![t.trial.to_string()];
                        r.extend(metric_vals(&t.prior_metrics));
                        r.extend(metric_vals(&t.posterior_metrics));
                        r.push(t.measurements.len().to_string());
                        r.push(t.flipped.to_string());
                        r
                    })
                    .collect();
                (header, rows)
            }
            ExperimentBody::Gait { trials, .. } => {
                let header = ["trial", "psi", "e_psi_prior", "e_psi_posterior", "decision"].map(String::from).to_vec();
                let rows = trials
                    .iter()
                    .map(|t| {
                        vec![
                            t.trial.to_string(),
                            num(t.psi),
                            num(t.e_psi_prior),
                            num(t.e_psi_posterior),
                            t.decision.to_string(),
                        ]
                    })
                    .collect();
                (header, rows)
            }
            ExperimentBody::Door { steps, .. } => {
                let k = steps.first().map_or(0, |s| s.a.len());
                let mut header = vec!["step".to_string(), "psi".to_string()];
                for name in ["a", "weight", "tau", "kappa", "beta", "gamma", "e_var"] {
                    header.extend((1..=k).map(|i| format!("{name}_{i}")));
                }
                let rows = steps
                    .iter()
                    .map(|s| {
                        let mut r = vec![s.step.to_string(), s.psi.map_or(String::new(), num)];
                        r.extend(s.a.iter().map(|&x| num(x)));
                        r.extend(s.weights.iter().map(|&x| num(x)));
                        r.extend(s.nig.iter().map(|n| num(n.tau)));
                        r.extend(s.nig.iter().map(|n| num(n.kappa)));
                        r.extend(s.nig.iter().map(|n| num(n.beta)));
                        r.extend(s.nig.iter().map(|n| num(n.gamma)));
                        r.extend(s.variances.iter().map(|&x| num(x)));
                        r
                    })
                    .collect();
                (header, rows)
            }
        }
    }
}

/// Writes `report.json`, `metrics.csv` and `density.csv` into `dir`.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut json = serde_json::to_string_pretty(report).expect("report serialises");
    json.push('\n');
    let report_path = write(dir.join("report.json"), json.as_bytes())?;

    let (header, rows) = report.metrics_table();
    let metrics_path = write(dir.join("metrics.csv"), &csv_bytes(&header, &rows))?;

    let header = ["curve", "psi", "density"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = report
        .densities
        .iter()
        .flat_map(|c| {
            c.psi
                .iter()
                .zip(&c.density)
                .map(|(&x, &d)| vec![c.label.clone(), num(x), num(d)])
        })
        .collect();
    let density_path = write(dir.join("density.csv"), &csv_bytes(&header, &rows))?;
    Ok(vec![report_path, metrics_path, density_path])
}

pub fn load_report(path: &Path) -> Result<ExperimentReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
