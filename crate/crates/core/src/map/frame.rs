use std::path::{Path, PathBuf};

use nalgebra::{Matrix4, Point3};
use serde::{Deserialize, Serialize};

use super::camera::{CameraModel, Pose};
use crate::conjugate::ClassIndex;
use crate::error::{Error, Result};

/// Label value marking a pixel without a class.
pub const NO_LABEL: u16 = 0;

/// Depth image with per-pixel class labels, both row-major.
///
/// Depth is in meters with 0 (or any non-finite / negative value) meaning
/// invalid. Labels are one-based class numbers; [`NO_LABEL`] marks pixels
/// to skip.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFrame {
    pub width: usize,
    pub height: usize,
    pub depth: Vec<f32>,
    pub labels: Vec<u16>,
}

impl LabeledFrame {
    pub fn new(width: usize, height: usize, depth: Vec<f32>, labels: Vec<u16>) -> Result<Self> {
        let n = width * height;
        if depth.len() != n || labels.len() != n {
            return Err(Error::domain(format!(
                "{width}x{height} frame needs {n} pixels, got depth {} and labels {}",
                depth.len(),
                labels.len()
            )));
        }
        Ok(Self { width, height, depth, labels })
    }

    fn valid_depth(d: f32) -> bool {
        d.is_finite() && d > 0.0
    }

    /// Checks that every pixel with valid depth carries a label in `1..=k`.
    pub fn validate(&self, k: usize) -> Result<()> {
        for (i, (&d, &l)) in self.depth.iter().zip(&self.labels).enumerate() {
            if Self::valid_depth(d) && (l == NO_LABEL || l as usize > k) {
                return Err(Error::domain(format!(
                    "pixel ({}, {}) has label {l} outside 1..={k}",
                    i % self.width,
                    i / self.width
                )));
            }
        }
        Ok(())
    }
}

/// World-frame points with their class labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SemanticPointCloud {
    pub points: Vec<(Point3<f64>, ClassIndex)>,
}

impl SemanticPointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn extend(&mut self, other: SemanticPointCloud) {
        self.points.extend(other.points);
    }
}

/// Back-projects labeled pixels on a `stride` lattice into the world frame.
/// Pixels with invalid depth or no label are skipped.
pub fn project_labels(
    frame: &LabeledFrame,
    cam: &CameraModel,
    pose: &Pose,
    stride: usize,
) -> Result<SemanticPointCloud> {
    if frame.width != cam.width || frame.height != cam.height {
        return Err(Error::domain(format!(
            "frame is {}x{}, camera {}x{}",
            frame.width, frame.height, cam.width, cam.height
        )));
    }
    if stride == 0 {
        return Err(Error::domain("stride must be positive"));
    }
    let mut points = Vec::new();
    for v in (0..frame.height).step_by(stride) {
        for u in (0..frame.width).step_by(stride) {
            let i = v * frame.width + u;
            let d = frame.depth[i];
            let label = frame.labels[i];
            if !LabeledFrame::valid_depth(d) || label == NO_LABEL {
                continue;
            }
            let p = pose.transform(&cam.back_project(u as f64, v as f64, d as f64));
            points.push((p, ClassIndex(label as usize - 1)));
        }
    }
    Ok(SemanticPointCloud { points })
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameEntry {
    depth: PathBuf,
    labels: PathBuf,
    /// Row-major 4×4 camera-to-world matrix.
    pose: [[f64; 4]; 4],
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    camera: CameraModel,
    frames: Vec<FrameEntry>,
}

const MANIFEST_VERSION: u32 = 1;

fn write_raw(path: &Path, bytes: Vec<u8>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `manifest.json` plus one `.depth` (f32 LE) and one `.labels`
/// (u16 LE) file per frame into `dir`. Returns the manifest path.
pub fn write_frames(dir: &Path, cam: &CameraModel, frames: &[(LabeledFrame, Pose)]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(frames.len());
    for (i, (frame, pose)) in frames.iter().enumerate() {
        let depth = PathBuf::from(format!("frame_{i:04}.depth"));
        let labels = PathBuf::from(format!("frame_{i:04}.labels"));
        write_raw(&dir.join(&depth), frame.depth.iter().flat_map(|d| d.to_le_bytes()).collect())?;
        write_raw(&dir.join(&labels), frame.labels.iter().flat_map(|l| l.to_le_bytes()).collect())?;
        let m = pose.to_matrix4();
        let pose = std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]));
        entries.push(FrameEntry { depth, labels, pose });
    }
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        camera: *cam,
        frames: entries,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Reads a manifest written by [`write_frames`]; frame paths are relative
/// to the manifest's directory.
pub fn read_frames(manifest_path: &Path) -> Result<(CameraModel, Vec<(LabeledFrame, Pose)>)> {
    let parse_err = |message: String| Error::Parse {
        path: manifest_path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
    if manifest.version != MANIFEST_VERSION {
        return Err(parse_err(format!("unsupported manifest version {}", manifest.version)));
    }
    let cam = manifest.camera;
    cam.validate().map_err(|e| parse_err(e.to_string()))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let n = cam.width * cam.height;
    let mut frames = Vec::with_capacity(manifest.frames.len());
    for (i, entry) in manifest.frames.iter().enumerate() {
        let read = |p: &Path, bytes_per: usize| -> Result<Vec<u8>> {
            let path = base.join(p);
            let data = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if data.len() != n * bytes_per {
                return Err(Error::Parse {
                    path,
                    message: format!("expected {} bytes, found {}", n * bytes_per, data.len()),
                });
            }
            Ok(data)
        };
        let depth = read(&entry.depth, 4)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let labels = read(&entry.labels, 2)?
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]))
            .collect();
        let m = Matrix4::from_fn(|r, c| entry.pose[r][c]);
        let pose = Pose::from_matrix4(&m).map_err(|e| parse_err(format!("frame {i}: {e}")))?;
        frames.push((LabeledFrame::new(cam.width, cam.height, depth, labels)?, pose));
    }
    Ok((cam, frames))
}

#[cfg(test)]
mod tests {
    use nalgebra::Vector3;

    use super::*;

    fn cam() -> CameraModel {
        CameraModel::new(100.0, 100.0, 4.0, 3.0, 8, 6).unwrap()
    }

    fn flat(depth: f32, label: u16) -> LabeledFrame {
        LabeledFrame::new(8, 6, vec![depth; 48], vec![label; 48]).unwrap()
    }

    #[test]
    fn principal_ray() {
        let mut f = flat(0.0, 1);
        f.depth[3 * 8 + 4] = 2.0;
        let cloud = project_labels(&f, &cam(), &Pose::identity(), 1).unwrap();
        assert_eq!(cloud.len(), 1);
        assert_eq!(cloud.points[0].0, Point3::new(0.0, 0.0, 2.0));
        assert_eq!(cloud.points[0].1, ClassIndex(0));
    }

    #[test]
    fn translation_shifts_every_point() {
        let f = flat(1.5, 2);
        let t = Vector3::new(0.25, -1.0, 3.0);
        let a = project_labels(&f, &cam(), &Pose::identity(), 1).unwrap();
        let b = project_labels(&f, &cam(), &Pose::from_translation(t), 1).unwrap();
        for ((p, _), (q, _)) in a.points.iter().zip(&b.points) {
            assert_eq!(*q, Point3::from(p.coords + t));
        }
    }

    #[test]
    fn stride_and_invalid_pixels() {
        let mut f = flat(1.0, 1);
        f.labels[0] = NO_LABEL;
        f.depth[2] = f32::NAN;
        let all = project_labels(&f, &cam(), &Pose::identity(), 1).unwrap();
        assert_eq!(all.len(), 46);
        let strided = project_labels(&f, &cam(), &Pose::identity(), 2).unwrap();
        assert_eq!(strided.len(), 4 * 3 - 2);
        assert!(project_labels(&f, &cam(), &Pose::identity(), 0).is_err());
    }

    #[test]
    fn fronto_parallel_plane() {
        let f = flat(1.0, 1);
        let cloud = project_labels(&f, &cam(), &Pose::identity(), 1).unwrap();
        assert!(cloud.points.iter().all(|(p, _)| (p.z - 1.0).abs() < 1e-9));
    }

    #[test]
    fn validate_checks_labels() {
        let mut f = flat(1.0, 3);
        assert!(f.validate(3).is_ok());
        assert!(f.validate(2).is_err());
        f.labels[5] = NO_LABEL;
        assert!(f.validate(3).is_err());
        f.depth[5] = 0.0;
        assert!(f.validate(3).is_ok());
    }

    #[test]
    fn frames_round_trip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let mut f = flat(1.25, 2);
        f.labels[7] = 1;
        let pose = Pose::from_translation(Vector3::new(0.1, 0.2, 0.3));
        let manifest = write_frames(dir.path(), &cam(), &[(f.clone(), pose)]).unwrap();
        let (c, frames) = read_frames(&manifest).unwrap();
        assert_eq!(c, cam());
        assert_eq!(frames[0].0, f);
        assert_eq!(frames[0].1, pose);
    }
}
