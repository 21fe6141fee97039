//! Sparse semantic voxel map: pixel back-projection, per-voxel Dirichlet
//! fusion and region-scoped property updates.

mod camera;
mod frame;
mod grid;
mod snapshot;

pub use camera::{CameraModel, Pose};
pub use frame::{project_labels, read_frames, write_frames, LabeledFrame, SemanticPointCloud, NO_LABEL};
pub use grid::{CellQuery, CellState, PsiHandle, RegionMask, VoxelGrid, VoxelId, DEFAULT_RESOLUTION};
pub use snapshot::{load_snapshot, save_snapshot, SNAPSHOT_FORMAT, SNAPSHOT_VERSION};

/// Default pixel subsampling stride for [`project_labels`].
pub const DEFAULT_STRIDE: usize = 2;
