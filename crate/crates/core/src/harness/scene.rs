use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use super::config::{CameraConfig, ScenarioConfig, SceneConfig};
use super::confusion::ConfusionMatrix;
use super::metrics::{ClassMap, ProbabilityMap};
use crate::conjugate::ClassIndex;
use crate::error::{Error, Result};
use crate::map::{project_labels, CameraModel, LabeledFrame, Pose, RegionMask, VoxelGrid, VoxelId};
use crate::property::PropertyTable;

/// One contiguous block of ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneRegion {
    pub name: String,
    pub class: ClassIndex,
    pub mask: RegionMask,
}

/// Planar scene at `z = 0`: one class per cell, laid out on a
/// `width × height` block of voxels `[x, y, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneLayout {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub truth: ClassMap,
    /// Configured regions in order, then the remaining background cells.
    pub regions: Vec<SceneRegion>,
}

impl SceneLayout {
    pub fn from_config(scene: &SceneConfig, table: &PropertyTable) -> Result<Self> {
        let class_of = |name: &str, path: String| {
            table.index_of(name).ok_or_else(|| Error::Config {
                path,
                message: format!("unknown class `{name}`"),
            })
        };
        let background = class_of(&scene.background, "scene.background".into())?;
        let mut labels = vec![background.0; scene.width * scene.height];
        let mut covered = vec![false; labels.len()];
        let mut regions = Vec::with_capacity(scene.regions.len() + 1);
        for (i, r) in scene.regions.iter().enumerate() {
            let class = class_of(&r.class, format!("scene.regions[{i}].class"))?;
            let mut ids = Vec::new();
            for y in r.y[0]..r.y[1] {
                for x in r.x[0]..r.x[1] {
                    labels[y * scene.width + x] = class.0;
                    covered[y * scene.width + x] = true;
                    ids.push([x as i64, y as i64, 0]);
                }
            }
            regions.push(SceneRegion {
                name: format!("region{i}"),
                class,
                mask: RegionMask::new(ids),
            });
        }
        let rest: Vec<VoxelId> = (0..labels.len())
            .filter(|&i| !covered[i])
            .map(|i| [(i % scene.width) as i64, (i / scene.width) as i64, 0])
            .collect();
        if !rest.is_empty() {
            regions.push(SceneRegion {
                name: "background".into(),
                class: background,
                mask: RegionMask::new(rest),
            });
        }
        Ok(Self {
            width: scene.width,
            height: scene.height,
            resolution: scene.resolution,
            truth: ClassMap {
                width: scene.width,
                height: scene.height,
                labels,
            },
            regions,
        })
    }

    /// Voxels of the scene in row-major map order.
    pub fn cell_ids(&self) -> impl Iterator<Item = VoxelId> + '_ {
        (0..self.width * self.height).map(|i| [(i % self.width) as i64, (i / self.width) as i64, 0])
    }

    /// Origin placing layer 0 symmetrically around the scene plane.
    pub fn origin(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, -0.5 * self.resolution)
    }

    /// Empty map over `table` with every scene cell present (uniform belief).
    pub fn empty_grid(&self, table: &PropertyTable) -> Result<VoxelGrid> {
        let mut g = VoxelGrid::with_table(table.clone(), self.resolution, self.origin())?;
        for id in self.cell_ids() {
            g.ensure_cell(id);
        }
        Ok(g)
    }

    /// Map holding one vision count of the true class per scene cell.
    pub fn truth_grid(&self, table: &PropertyTable) -> Result<VoxelGrid> {
        let mut g = self.empty_grid(table)?;
        let k = table.len();
        for (id, &c) in self.cell_ids().zip(&self.truth.labels) {
            let mut counts = vec![0.0; k];
            counts[c] = 1.0;
            g.add_counts(id, &counts)?;
        }
        Ok(g)
    }

    /// Predictive class probabilities of every scene cell.
    pub fn probability_map(&self, grid: &VoxelGrid) -> Result<ProbabilityMap> {
        let k = grid.k();
        let mut probs = Vec::with_capacity(self.width * self.height * k);
        for id in self.cell_ids() {
            probs.extend_from_slice(grid.query_cell(&id)?.class.probs());
        }
        Ok(ProbabilityMap {
            width: self.width,
            height: self.height,
            k,
            probs,
        })
    }
}

/// Output of [`generate_scene`].
#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub layout: SceneLayout,
    pub truth_grid: VoxelGrid,
    pub camera: CameraModel,
    pub frames: Vec<(LabeledFrame, Pose)>,
    pub stride: usize,
}

impl GeneratedScene {
    /// Fuses every frame into a fresh map (the vision-only pipeline).
    pub fn fuse(&self, table: &PropertyTable) -> Result<VoxelGrid> {
        let mut g = self.layout.empty_grid(table)?;
        for (frame, pose) in &self.frames {
            g.integrate_cloud(&project_labels(frame, &self.camera, pose, self.stride)?)?;
        }
        Ok(g)
    }
}

fn camera_model(cam: &CameraConfig) -> Result<CameraModel> {
    let cx = cam.cx.unwrap_or(cam.width as f64 / 2.0);
    let cy = cam.cy.unwrap_or(cam.height as f64 / 2.0);
    CameraModel::new(cam.fx, cam.fy, cx, cy, cam.width, cam.height).map_err(|e| Error::Config {
        path: "scene.camera".into(),
        message: e.to_string(),
    })
}

/// Camera looking straight down (`−z`) from `(x, y, altitude)`.
pub fn downward_pose(x: f64, y: f64, altitude: f64) -> Pose {
    let r = Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0);
    Pose::new(r, Vector3::new(x, y, altitude)).expect("axis flip is a rotation")
}

/// Renders the configured camera trajectory over the scene.
///
/// Every pixel whose ray hits a scene cell gets depth `altitude` and a label
/// drawn from the confusion row of that cell's true class; other pixels get
/// no depth and no label. The truth lookup uses the same back-projection
/// (from the stored `f32` depth) and voxel rounding as the map, so a
/// pixel's label is always scored against the cell it lands in.
pub fn generate_scene<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    table: &PropertyTable,
    confusion: &ConfusionMatrix,
    rng: &mut R,
) -> Result<GeneratedScene> {
    let scene = config.require_scene()?;
    let cam_cfg = scene.camera.as_ref().ok_or_else(|| Error::Config {
        path: "scene.camera".into(),
        message: "section is required for vision priors".into(),
    })?;
    if confusion.k() != table.len() {
        return Err(Error::domain(format!(
            "confusion matrix is {0}x{0}, table has {1} classes",
            confusion.k(),
            table.len()
        )));
    }
    let layout = SceneLayout::from_config(scene, table)?;
    let truth_grid = layout.truth_grid(table)?;
    let camera = camera_model(cam_cfg)?;
    let sampler = confusion.sampler();
    let centre = [
        layout.width as f64 * layout.resolution / 2.0,
        layout.height as f64 * layout.resolution / 2.0,
    ];

    let depth = cam_cfg.altitude as f32;
    let mut frames = Vec::with_capacity(cam_cfg.frames);
    for f in 0..cam_cfg.frames {
        let [px, py] = match &cam_cfg.positions {
            Some(p) => p[f % p.len()],
            None => centre,
        };
        let pose = downward_pose(px, py, cam_cfg.altitude);
        let n = camera.width * camera.height;
        let mut depths = vec![0.0f32; n];
        let mut labels = vec![0u16; n];
        for v in 0..camera.height {
            for u in 0..camera.width {
                let world = pose.transform(&camera.back_project(u as f64, v as f64, depth as f64));
                let [x, y, z] = truth_grid.voxel_id(&world);
                let inside = z == 0 && (0..layout.width as i64).contains(&x) && (0..layout.height as i64).contains(&y);
                if !inside {
                    continue;
                }
                let truth = ClassIndex(layout.truth.labels[y as usize * layout.width + x as usize]);
                let i = v * camera.width + u;
                depths[i] = depth;
                labels[i] = (sampler.sample(truth, rng).0 + 1) as u16;
            }
        }
        frames.push((LabeledFrame::new(camera.width, camera.height, depths, labels)?, pose));
    }
    Ok(GeneratedScene {
        layout,
        truth_grid,
        camera,
        frames,
        stride: cam_cfg.stride,
    })
}
