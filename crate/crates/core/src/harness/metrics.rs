use std::fmt;
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::conjugate::argmax;
use crate::error::{Error, Result};

/// Probabilities are clamped to `[BCE_CLAMP, 1 − BCE_CLAMP]` before taking logs.
pub const BCE_CLAMP: f64 = 1e-7;
/// SSIM window edge (clipped to the map size for smaller maps).
pub const SSIM_WINDOW: usize = 8;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

/// Ground-truth class per cell, row-major, zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<usize>,
}

/// Per-cell class probabilities, row-major with the `k` entries of a cell contiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityMap {
    pub width: usize,
    pub height: usize,
    pub k: usize,
    pub probs: Vec<f64>,
}

impl ProbabilityMap {
    pub fn cell(&self, i: usize) -> &[f64] {
        &self.probs[i * self.k..(i + 1) * self.k]
    }

    pub fn argmax_map(&self) -> ClassMap {
        ClassMap {
            width: self.width,
            height: self.height,
            labels: (0..self.width * self.height).map(|i| argmax(self.cell(i))).collect(),
        }
    }

    /// One-hot map of `truth`; scoring it against `truth` is the perfect case.
    pub fn one_hot(truth: &ClassMap, k: usize) -> Self {
        let mut probs = vec![0.0; truth.labels.len() * k];
        for (i, &c) in truth.labels.iter().enumerate() {
            probs[i * k + c] = 1.0;
        }
        Self {
            width: truth.width,
            height: truth.height,
            k,
            probs,
        }
    }
}

/// Input of standalone scoring: a prediction and the truth it is scored against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringInput {
    pub pred: ProbabilityMap,
    pub truth: ClassMap,
}

impl ScoringInput {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn score(&self) -> Result<MetricsRecord> {
        compute_metrics(&self.pred, &self.truth)
    }
}

/// PSNR in dB; `+∞` (zero error) serialises as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psnr(pub f64);

impl Psnr {
    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Psnr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct PsnrVisitor;
        impl Visitor<'_> for PsnrVisitor {
            type Value = Psnr;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Psnr, E> {
                Ok(Psnr(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Psnr, E> {
                Ok(Psnr(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Psnr, E> {
                Ok(Psnr(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Psnr, E> {
                match v {
                    "inf" => Ok(Psnr(f64::INFINITY)),
                    other => Err(E::custom(format!("unexpected PSNR string `{other}`"))),
                }
            }
        }
        d.deserialize_any(PsnrVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub accuracy: f64,
    /// Mean over cells and classes, natural log.
    pub bce: f64,
    /// Summed over classes, averaged over cells (`k · bce`).
    pub bce_per_cell: f64,
    pub mse: f64,
    pub psnr: Psnr,
    pub ssim: f64,
}

/// Accuracy, binary cross entropy, MSE/PSNR and SSIM of a probability map
/// against one-hot truth, all with data range 1.
///
/// SSIM uses `8 × 8` windows at stride 1 (clipped to the map size), sample
/// (co)variances, `C₁ = 0.01²` and `C₂ = 0.03²`, averaged over windows and
/// then over class channels.
pub fn compute_metrics(pred: &ProbabilityMap, truth: &ClassMap) -> Result<MetricsRecord> {
    let n = truth.width * truth.height;
    if pred.width != truth.width || pred.height != truth.height {
        return Err(Error::domain(format!(
            "prediction is {}x{}, truth {}x{}",
            pred.width, pred.height, truth.width, truth.height
        )));
    }
    if n == 0 || pred.k == 0 {
        return Err(Error::domain("empty map"));
    }
    if truth.labels.len() != n || pred.probs.len() != n * pred.k {
        return Err(Error::domain("map buffers do not match their dimensions"));
    }
    if let Some(&c) = truth.labels.iter().find(|&&c| c >= pred.k) {
        return Err(Error::domain(format!("truth label {c} out of range for k = {}", pred.k)));
    }
    let k = pred.k;

    let correct = (0..n).filter(|&i| argmax(pred.cell(i)) == truth.labels[i]).count();
    let accuracy = correct as f64 / n as f64;

    let mut bce_sum = 0.0;
    let mut se_sum = 0.0;
    for i in 0..n {
        for (c, &p) in pred.cell(i).iter().enumerate() {
            let y = if truth.labels[i] == c { 1.0 } else { 0.0 };
            let q = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            bce_sum -= y * q.ln() + (1.0 - y) * (1.0 - q).ln();
            se_sum += (p - y) * (p - y);
        }
    }
    let bce = bce_sum / (n * k) as f64;
    let mse = se_sum / (n * k) as f64;
    let psnr = if mse == 0.0 {
        Psnr(f64::INFINITY)
    } else {
        Psnr(10.0 * (1.0 / mse).log10())
    };

    let ssim = (0..k)
        .map(|c| {
            let x: Vec<f64> = (0..n).map(|i| pred.probs[i * k + c]).collect();
            let y: Vec<f64> = truth.labels.iter().map(|&l| if l == c { 1.0 } else { 0.0 }).collect();
            ssim_channel(&x, &y, truth.width, truth.height)
        })
        .sum::<f64>()
        / k as f64;

    Ok(MetricsRecord {
        accuracy,
        bce,
        bce_per_cell: bce * k as f64,
        mse,
        psnr,
        ssim,
    })
}

fn ssim_channel(x: &[f64], y: &[f64], width: usize, height: usize) -> f64 {
    let ww = SSIM_WINDOW.min(width);
    let wh = SSIM_WINDOW.min(height);
    let m = (ww * wh) as f64;
    let ddof = if ww * wh > 1 { 1.0 } else { 0.0 };
    let mut total = 0.0;
    let mut windows = 0usize;
    for r0 in 0..=height - wh {
        for c0 in 0..=width - ww {
            let (mut sx, mut sy) = (0.0, 0.0);
            for r in r0..r0 + wh {
                for c in c0..c0 + ww {
                    sx += x[r * width + c];
                    sy += y[r * width + c];
                }
            }
            let (mx, my) = (sx / m, sy / m);
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for r in r0..r0 + wh {
                for c in c0..c0 + ww {
                    let dx = x[r * width + c] - mx;
                    let dy = y[r * width + c] - my;
                    vx += dx * dx;
                    vy += dy * dy;
                    cxy += dx * dy;
                }
            }
            let norm = m - ddof;
            let (vx, vy, cxy) = (vx / norm, vy / norm, cxy / norm);
            total += ((2.0 * mx * my + SSIM_C1) * (2.0 * cxy + SSIM_C2))
                / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2));
            windows += 1;
        }
    }
    total / windows as f64
}
