//! JSON snapshot of a [`VoxelGrid`]. The layout is documented in
//! `docs/snapshot-format.md`.

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::grid::{CellState, PsiHandle, VoxelGrid, VoxelId};
use crate::conjugate::{DirichletParams, NigParams, ProductPrior};
use crate::error::{Error, Result};
use crate::property::{InitPolicy, PropertyEntry, PropertyTable};

pub const SNAPSHOT_FORMAT: &str = "semprop-voxel-grid";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TableRecord {
    property: String,
    contact: String,
    entries: Vec<PropertyEntry>,
}

#[derive(Serialize, Deserialize)]
struct PriorRecord {
    handle: u64,
    a: Vec<f64>,
    nig: Vec<NigParams>,
}

#[derive(Serialize, Deserialize)]
struct CellRecord {
    voxel: VoxelId,
    alpha: Vec<f64>,
    psi: Option<u64>,
    counts_since_psi: Vec<f64>,
    measurement_count: u64,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    format: String,
    version: u32,
    k: usize,
    resolution: f64,
    origin: [f64; 3],
    class_names: Vec<String>,
    table: Option<TableRecord>,
    init_policy: InitPolicy,
    next_handle: u64,
    shared_priors: Vec<PriorRecord>,
    cells: Vec<CellRecord>,
}

fn to_snapshot(g: &VoxelGrid) -> Snapshot {
    Snapshot {
        format: SNAPSHOT_FORMAT.into(),
        version: SNAPSHOT_VERSION,
        k: g.k(),
        resolution: g.resolution(),
        origin: [g.origin().x, g.origin().y, g.origin().z],
        class_names: g.class_names().to_vec(),
        table: g.table().map(|t| TableRecord {
            property: t.property.clone(),
            contact: t.contact.clone(),
            entries: t.entries().to_vec(),
        }),
        init_policy: g.init_policy(),
        next_handle: g.next_handle,
        shared_priors: g
            .psi
            .iter()
            .map(|(h, p)| PriorRecord {
                handle: h.0,
                a: p.a().alpha().to_vec(),
                nig: p.nig().to_vec(),
            })
            .collect(),
        cells: g
            .cells
            .iter()
            .map(|(id, c)| CellRecord {
                voxel: *id,
                alpha: c.alpha.alpha().to_vec(),
                psi: c.local_psi.map(|h| h.0),
                counts_since_psi: c.counts_since_psi.clone(),
                measurement_count: c.measurement_count,
            })
            .collect(),
    }
}

fn from_snapshot(s: Snapshot) -> Result<VoxelGrid> {
    if s.format != SNAPSHOT_FORMAT {
        return Err(Error::domain(format!("not a grid snapshot (format `{}`)", s.format)));
    }
    if s.version != SNAPSHOT_VERSION {
        return Err(Error::domain(format!("unsupported snapshot version {}", s.version)));
    }
    let origin = Vector3::from(s.origin);
    let mut g = match s.table {
        Some(t) => {
            let table = PropertyTable::new(t.property, t.contact, t.entries)?;
            if table.len() != s.k {
                return Err(Error::domain(format!("table has {} rows, header k = {}", table.len(), s.k)));
            }
            VoxelGrid::with_table(table, s.resolution, origin)?
        }
        None => VoxelGrid::new(s.k, s.resolution, origin)?,
    };
    g.set_class_names(s.class_names)?;
    g.set_init_policy(s.init_policy);
    for p in s.shared_priors {
        let prior = ProductPrior::new(DirichletParams::new(p.a)?, p.nig)?;
        if prior.k() != s.k {
            return Err(Error::domain(format!("shared prior {} has {} classes", p.handle, prior.k())));
        }
        if p.handle >= s.next_handle {
            return Err(Error::domain(format!("shared prior handle {} >= next_handle", p.handle)));
        }
        g.psi.insert(PsiHandle(p.handle), prior);
    }
    g.next_handle = s.next_handle;
    for c in s.cells {
        if c.alpha.len() != s.k || c.counts_since_psi.len() != s.k {
            return Err(Error::domain(format!("cell {:?} has wrong class count", c.voxel)));
        }
        let local_psi = c.psi.map(PsiHandle);
        if let Some(h) = local_psi {
            if !g.psi.contains_key(&h) {
                return Err(Error::domain(format!("cell {:?} references missing prior {}", c.voxel, h.0)));
            }
        }
        g.cells.insert(
            c.voxel,
            CellState {
                alpha: DirichletParams::new(c.alpha)?,
                local_psi,
                counts_since_psi: c.counts_since_psi,
                measurement_count: c.measurement_count,
            },
        );
    }
    Ok(g)
}

pub fn save_snapshot(g: &VoxelGrid, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&to_snapshot(g)).expect("snapshot serialises");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: &Path) -> Result<VoxelGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let s: Snapshot = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    from_snapshot(s).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
