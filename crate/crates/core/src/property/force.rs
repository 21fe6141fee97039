use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default sanity bound on |ψ| for friction readings.
pub const DEFAULT_PSI_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSample {
    /// Seconds on a monotonic clock.
    pub timestamp: f64,
    /// Tangential force [N].
    pub f_t: f64,
    /// Normal force [N].
    pub f_n: f64,
}

/// A friction value together with its range check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionReading {
    pub psi: f64,
    /// `|ψ|` exceeded the configured bound, typically a contact transient.
    pub out_of_range: bool,
}

/// `ψ = F_t / F_n` with the default bound.
pub fn friction_from_forces(s: &ForceSample) -> Result<FrictionReading> {
    friction_from_forces_with(s, DEFAULT_PSI_MAX)
}

pub fn friction_from_forces_with(s: &ForceSample, psi_max: f64) -> Result<FrictionReading> {
    if !(s.f_n > 0.0 && s.f_n.is_finite()) {
        return Err(Error::InvalidContact { f_n: s.f_n });
    }
    let psi = s.f_t / s.f_n;
    if !psi.is_finite() {
        return Err(Error::domain(format!("tangential force {} is not finite", s.f_t)));
    }
    Ok(FrictionReading {
        psi,
        out_of_range: psi.abs() > psi_max,
    })
}

/// First-order exponential smoother,
/// `smoothed ← α_s·sample + (1 − α_s)·smoothed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowPassState {
    pub smoothed: f64,
    pub alpha_smooth: f64,
}

impl LowPassState {
    pub const DEFAULT_ALPHA: f64 = 0.2;

    pub fn new(alpha_smooth: f64, initial: f64) -> Result<Self> {
        if !(alpha_smooth > 0.0 && alpha_smooth <= 1.0) {
            return Err(Error::domain(format!("smoothing factor {alpha_smooth} outside (0, 1]")));
        }
        Ok(Self {
            smoothed: initial,
            alpha_smooth,
        })
    }

    pub fn step(&mut self, sample: f64) -> f64 {
        self.smoothed = self.alpha_smooth * sample + (1.0 - self.alpha_smooth) * self.smoothed;
        self.smoothed
    }
}

pub fn lowpass(state: LowPassState, sample: f64) -> (LowPassState, f64) {
    let mut next = state;
    let y = next.step(sample);
    (next, y)
}

/// Reads `timestamp,f_t,f_n` rows. Timestamps must not decrease.
pub fn read_force_stream(path: &Path) -> Result<Vec<ForceSample>> {
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file);
    let mut out: Vec<ForceSample> = Vec::new();
    for (i, row) in reader.deserialize::<ForceSample>().enumerate() {
        let s = row.map_err(|e| parse_err(format!("row {}: {e}", i + 1)))?;
        if let Some(prev) = out.last() {
            if s.timestamp < prev.timestamp {
                return Err(parse_err(format!(
                    "row {}: timestamp {} precedes {}",
                    i + 1,
                    s.timestamp,
                    prev.timestamp
                )));
            }
        }
        out.push(s);
    }
    Ok(out)
}

pub fn write_force_stream(path: &Path, samples: &[ForceSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    for s in samples {
        w.serialize(s).map_err(|e| Error::io(path, e.into()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
