use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::frame::SemanticPointCloud;
use crate::conjugate::{
    expected_mixture, predictive_class, CategoricalDist, DirichletParams, GaussianMixture, ProductPrior,
};
use crate::error::{Error, Result};
use crate::moments::{update_once, Diagnostics, UpdateOptions};
use crate::property::{build_likelihood, init_with_policy, InitPolicy, PropertyTable};

/// Integer voxel coordinates, `floor((p − origin) / resolution)` per axis.
pub type VoxelId = [i64; 3];

/// Default voxel edge length in meters.
pub const DEFAULT_RESOLUTION: f64 = 0.05;

/// Key into the grid's table of region-shared property priors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PsiHandle(pub u64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    /// Accumulated vision counts on top of the uniform initial belief.
    pub alpha: DirichletParams,
    /// Shared property prior written by the last measurement touching this cell.
    pub local_psi: Option<PsiHandle>,
    /// Vision counts received since `local_psi` was written.
    pub counts_since_psi: Vec<f64>,
    pub measurement_count: u64,
}

impl CellState {
    fn fresh(k: usize) -> Self {
        Self {
            alpha: DirichletParams::uniform(k),
            local_psi: None,
            counts_since_psi: vec![0.0; k],
            measurement_count: 0,
        }
    }
}

/// Set of voxels updated together by one property measurement.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionMask {
    voxels: BTreeSet<VoxelId>,
}

impl RegionMask {
    pub fn new(voxels: impl IntoIterator<Item = VoxelId>) -> Self {
        Self {
            voxels: voxels.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &VoxelId> {
        self.voxels.iter()
    }

    pub fn contains(&self, id: &VoxelId) -> bool {
        self.voxels.contains(id)
    }
}

impl FromIterator<VoxelId> for RegionMask {
    fn from_iter<I: IntoIterator<Item = VoxelId>>(iter: I) -> Self {
        Self::new(iter)
    }
}

/// Result of [`VoxelGrid::query_cell`].
#[derive(Debug, Clone, PartialEq)]
pub struct CellQuery {
    pub class: CategoricalDist,
    /// Present when the cell has a local prior or the grid has a table.
    pub property: Option<GaussianMixture>,
}

/// Sparse voxel grid holding a Dirichlet belief per cell and region-shared
/// property priors.
///
/// Points exactly on a voxel face belong to the voxel on the upper side of
/// that face, i.e. the one whose lower corner lies on it (`floor`).
///
/// Vision counts integrated after a property update accumulate on top of the
/// shared prior: a cell's effective belief is `â + counts_since_psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    k: usize,
    resolution: f64,
    origin: Vector3<f64>,
    class_names: Vec<String>,
    table: Option<PropertyTable>,
    init_policy: InitPolicy,
    pub(crate) cells: BTreeMap<VoxelId, CellState>,
    pub(crate) psi: BTreeMap<PsiHandle, ProductPrior>,
    pub(crate) next_handle: u64,
}

impl VoxelGrid {
    pub fn new(k: usize, resolution: f64, origin: Vector3<f64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("grid needs at least one class"));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::domain(format!("resolution {resolution} must be positive")));
        }
        if !origin.iter().all(|o| o.is_finite()) {
            return Err(Error::domain("origin is not finite"));
        }
        Ok(Self {
            k,
            resolution,
            origin,
            class_names: (1..=k).map(|i| format!("class{i}")).collect(),
            table: None,
            init_policy: InitPolicy::default(),
            cells: BTreeMap::new(),
            psi: BTreeMap::new(),
            next_handle: 0,
        })
    }

    /// Grid whose classes are the table's rows.
    pub fn with_table(table: PropertyTable, resolution: f64, origin: Vector3<f64>) -> Result<Self> {
        let mut g = Self::new(table.len(), resolution, origin)?;
        g.class_names = table.class_names();
        g.table = Some(table);
        Ok(g)
    }

    pub fn set_init_policy(&mut self, policy: InitPolicy) {
        self.init_policy = policy;
    }

    pub fn init_policy(&self) -> InitPolicy {
        self.init_policy
    }

    pub fn set_class_names(&mut self, names: Vec<String>) -> Result<()> {
        if names.len() != self.k {
            return Err(Error::domain(format!("{} names for {} classes", names.len(), self.k)));
        }
        self.class_names = names;
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> &Vector3<f64> {
        &self.origin
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn table(&self) -> Option<&PropertyTable> {
        self.table.as_ref()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = (&VoxelId, &CellState)> {
        self.cells.iter()
    }

    pub fn cell(&self, id: &VoxelId) -> Option<&CellState> {
        self.cells.get(id)
    }

    pub fn shared_priors(&self) -> impl Iterator<Item = (&PsiHandle, &ProductPrior)> {
        self.psi.iter()
    }

    pub fn voxel_id(&self, p: &Point3<f64>) -> VoxelId {
        let rel = (p.coords - self.origin) / self.resolution;
        [rel.x.floor() as i64, rel.y.floor() as i64, rel.z.floor() as i64]
    }

    pub fn voxel_center(&self, id: &VoxelId) -> Point3<f64> {
        let offset = Vector3::new(id[0] as f64 + 0.5, id[1] as f64 + 0.5, id[2] as f64 + 0.5);
        Point3::from(self.origin + offset * self.resolution)
    }

    /// Creates a cell with the uniform belief if it does not exist yet.
    pub fn ensure_cell(&mut self, id: VoxelId) -> &mut CellState {
        let k = self.k;
        self.cells.entry(id).or_insert_with(|| CellState::fresh(k))
    }

    /// Adds per-class counts to one cell.
    pub fn add_counts(&mut self, id: VoxelId, counts: &[f64]) -> Result<()> {
        if counts.len() != self.k || counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::domain(format!("counts {counts:?} are not {} non-negative values", self.k)));
        }
        let cell = self.ensure_cell(id);
        let alpha: Vec<f64> = cell.alpha.alpha().iter().zip(counts).map(|(a, c)| a + c).collect();
        cell.alpha = DirichletParams::new(alpha)?;
        for (s, c) in cell.counts_since_psi.iter_mut().zip(counts) {
            *s += c;
        }
        Ok(())
    }

    /// Adds one count per point to the class of the voxel it falls in.
    pub fn integrate_cloud(&mut self, cloud: &SemanticPointCloud) -> Result<()> {
        let mut counts: BTreeMap<VoxelId, Vec<f64>> = BTreeMap::new();
        for (p, class) in &cloud.points {
            if class.get() >= self.k {
                return Err(Error::domain(format!("point label {class} exceeds {} classes", self.k)));
            }
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(Error::domain("point coordinates are not finite"));
            }
            counts.entry(self.voxel_id(p)).or_insert_with(|| vec![0.0; self.k])[class.get()] += 1.0;
        }
        for (id, c) in counts {
            self.add_counts(id, &c)?;
        }
        Ok(())
    }

    fn effective_alpha_of(&self, cell: &CellState) -> DirichletParams {
        match cell.local_psi.and_then(|h| self.psi.get(&h)) {
            Some(psi) => {
                let a = psi.a().alpha().iter().zip(&cell.counts_since_psi).map(|(a, c)| a + c).collect();
                DirichletParams::new(a).expect("positive concentrations")
            }
            None => cell.alpha.clone(),
        }
    }

    /// Overwrites a cell's accumulated belief (creating the cell). Queries
    /// ignore it while the cell carries a shared property prior.
    pub fn set_alpha(&mut self, id: VoxelId, alpha: DirichletParams) -> Result<()> {
        if alpha.k() != self.k {
            return Err(Error::domain(format!("belief has {} classes, grid {}", alpha.k(), self.k)));
        }
        self.ensure_cell(id).alpha = alpha;
        Ok(())
    }

    /// Belief used for queries: the shared prior's `â` plus later vision
    /// counts if the cell has one, the accumulated counts otherwise.
    pub fn effective_alpha(&self, id: &VoxelId) -> Result<DirichletParams> {
        let cell = self.cells.get(id).ok_or(Error::NotFound(*id))?;
        Ok(self.effective_alpha_of(cell))
    }

    pub fn local_psi(&self, id: &VoxelId) -> Option<&ProductPrior> {
        self.cells.get(id)?.local_psi.and_then(|h| self.psi.get(&h))
    }

    fn cell_mixture(&self, cell: &CellState, alpha: &DirichletParams) -> Result<Option<GaussianMixture>> {
        if let Some(psi) = cell.local_psi.and_then(|h| self.psi.get(&h)) {
            let comps = expected_mixture(psi)?.components().to_vec();
            let weights = predictive_class(alpha)?.probs().to_vec();
            return GaussianMixture::new(weights, comps).map(Some);
        }
        match &self.table {
            Some(t) => build_likelihood(alpha, t).map(Some),
            None => Ok(None),
        }
    }

    pub fn query_cell(&self, id: &VoxelId) -> Result<CellQuery> {
        let cell = self.cells.get(id).ok_or(Error::NotFound(*id))?;
        let alpha = self.effective_alpha_of(cell);
        Ok(CellQuery {
            class: predictive_class(&alpha)?,
            property: self.cell_mixture(cell, &alpha)?,
        })
    }

    /// Fuses one property measurement into every cell of `region`.
    ///
    /// The region's effective beliefs are averaged, the property prior is
    /// taken from the region's shared prior when all cells carry the same
    /// one (with `a` replaced by the averaged belief) and built from `table`
    /// otherwise, one update step is run, and the result is written back as
    /// the new shared prior of every cell in the region.
    pub fn apply_property_measurement(
        &mut self,
        region: &RegionMask,
        psi: f64,
        table: &PropertyTable,
        opts: &UpdateOptions,
    ) -> Result<Diagnostics> {
        if region.is_empty() {
            return Err(Error::domain("region is empty"));
        }
        if table.len() != self.k {
            return Err(Error::domain(format!("table has {} classes, grid {}", table.len(), self.k)));
        }
        for id in region.iter() {
            self.ensure_cell(*id);
        }
        let handles: BTreeSet<Option<PsiHandle>> = region.iter().map(|id| self.cells[id].local_psi).collect();
        for h in handles.iter().flatten() {
            let k = self.psi[h].k();
            if k != self.k {
                return Err(Error::domain(format!("region prior has {k} classes, grid {}", self.k)));
            }
        }

        let mut sum = vec![0.0; self.k];
        for id in region.iter() {
            for (s, a) in sum.iter_mut().zip(self.effective_alpha(id)?.alpha()) {
                *s += a;
            }
        }
        let n = region.len() as f64;
        let mean = DirichletParams::new(sum.into_iter().map(|s| s / n).collect())?;

        let mut diag = Diagnostics::default();
        let prior = match handles.iter().next() {
            Some(Some(h)) if handles.len() == 1 => self.psi[h].with_a(mean)?,
            _ => {
                let init = init_with_policy(&mean, table, self.init_policy, &opts.floor)?;
                diag.beta_clamps += init.clamp_count();
                init.prior
            }
        };
        let posterior = update_once(&prior, psi, opts, &mut diag)?;

        let handle = PsiHandle(self.next_handle);
        self.next_handle += 1;
        self.psi.insert(handle, posterior);
        for id in region.iter() {
            let cell = self.cells.get_mut(id).expect("cell ensured above");
            cell.local_psi = Some(handle);
            cell.counts_since_psi.iter_mut().for_each(|c| *c = 0.0);
            cell.measurement_count += 1;
        }
        for h in handles.into_iter().flatten() {
            if !self.cells.values().any(|c| c.local_psi == Some(h)) {
                self.psi.remove(&h);
            }
        }
        Ok(diag)
    }

    /// `E[ψ]` over the region: the mean of the cells' mixture means.
    pub fn expected_property(&self, region: &RegionMask) -> Result<f64> {
        if region.is_empty() {
            return Err(Error::domain("region is empty"));
        }
        let mut total = 0.0;
        for id in region.iter() {
            let q = self.query_cell(id)?;
            let m = q.property.ok_or_else(|| {
                Error::domain(format!("voxel {id:?} has no property model (no table, no local prior)"))
            })?;
            total += m.mean();
        }
        Ok(total / region.len() as f64)
    }
}
