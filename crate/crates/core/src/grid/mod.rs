//! Dense labeled occupancy volumes.
//!
//! Labels are stored linearized with z varying fastest:
//! `index = (x * H + y) * D + z` for dims `(W, H, D)`.

mod boxes;
pub mod format;
mod prune;
mod stats;
mod taxonomy;

pub use boxes::{instances_from_boxes, Box3D};
pub use format::{load_grid, read_grid, save_grid, write_grid};
pub use prune::{prune_threshold, prune_topk, ScoredVoxel, ScoredVoxelSet};
pub use stats::{class_balance_weights, sparsity_stats, SparsityStats};
pub use taxonomy::{ClassTaxonomy, DEFAULT_CLASS_NAMES, DEFAULT_THING_NAMES};

use serde::{Deserialize, Serialize};

use crate::error::GridError;
use crate::Vec3;

/// Integer voxel coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VoxelCoord {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl VoxelCoord {
    pub const fn new(x: usize, y: usize, z: usize) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [usize; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[usize; 3]> for VoxelCoord {
    fn from([x, y, z]: [usize; 3]) -> Self {
        Self { x, y, z }
    }
}

/// Placement of a grid in the world: voxel counts, minimum corner and cubic voxel edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub dims: [usize; 3],
    /// World position of the minimum corner of voxel (0, 0, 0).
    pub origin: Vec3,
    pub voxel_size: f64,
}

impl Default for GridGeometry {
    /// 200 x 200 x 16 voxels of 0.4 m covering [-40, 40] x [-40, 40] x [-1, 5.4].
    fn default() -> Self {
        Self {
            dims: [200, 200, 16],
            origin: Vec3::new(-40.0, -40.0, -1.0),
            voxel_size: 0.4,
        }
    }
}

impl GridGeometry {
    pub fn new(dims: [usize; 3], origin: Vec3, voxel_size: f64) -> Result<Self, GridError> {
        let g = Self {
            dims,
            origin,
            voxel_size,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.dims.contains(&0) {
            return Err(GridError::EmptyDims(self.dims));
        }
        if !(self.voxel_size.is_finite() && self.voxel_size > 0.0) {
            return Err(GridError::BadVoxelSize(self.voxel_size));
        }
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(GridError::BadOrigin);
        }
        Ok(())
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// World position of the maximum corner of the grid.
    pub fn max_corner(&self) -> Vec3 {
        self.origin
            + Vec3::new(
                self.dims[0] as f64,
                self.dims[1] as f64,
                self.dims[2] as f64,
            ) * self.voxel_size
    }

    pub fn contains(&self, c: VoxelCoord) -> bool {
        c.x < self.dims[0] && c.y < self.dims[1] && c.z < self.dims[2]
    }

    pub fn linear_index(&self, c: VoxelCoord) -> usize {
        (c.x * self.dims[1] + c.y) * self.dims[2] + c.z
    }

    pub fn coord_of(&self, index: usize) -> VoxelCoord {
        let [_, h, d] = self.dims;
        VoxelCoord::new(index / (h * d), (index / d) % h, index % d)
    }

    /// Voxel containing `point` under half-open cells `[min, max)`, or `None` outside the grid.
    pub fn world_to_voxel(&self, point: &Vec3) -> Option<VoxelCoord> {
        let mut out = [0usize; 3];
        for axis in 0..3 {
            let lo = self.origin[axis];
            let p = point[axis];
            if !p.is_finite() {
                return None;
            }
            let mut c = ((p - lo) / self.voxel_size).floor();
            // floor of the quotient can be off by one ulp-induced cell; fix it so that
            // lo + c*vs <= p < lo + (c+1)*vs holds in floating arithmetic
            if lo + c * self.voxel_size > p {
                c -= 1.0;
            } else if lo + (c + 1.0) * self.voxel_size <= p {
                c += 1.0;
            }
            if c < 0.0 || c >= self.dims[axis] as f64 {
                return None;
            }
            out[axis] = c as usize;
        }
        Some(out.into())
    }

    pub fn voxel_center(&self, c: VoxelCoord) -> Result<Vec3, GridError> {
        if !self.contains(c) {
            return Err(GridError::CoordOutOfRange {
                coord: c.to_array(),
                dims: self.dims,
            });
        }
        Ok(self.origin
            + Vec3::new(c.x as f64 + 0.5, c.y as f64 + 0.5, c.z as f64 + 0.5) * self.voxel_size)
    }
}

/// Labeled occupancy volume with optional instance IDs and visibility mask.
///
/// Instance ID 0 means "no instance". The grid is immutable once shared; mutation
/// goes through `&mut self` on the owning value.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    geometry: GridGeometry,
    taxonomy: ClassTaxonomy,
    labels: Vec<u8>,
    instances: Option<Vec<u16>>,
    visible: Option<Vec<bool>>,
}

impl VoxelGrid {
    pub fn new(
        geometry: GridGeometry,
        taxonomy: ClassTaxonomy,
        labels: Vec<u8>,
    ) -> Result<Self, GridError> {
        geometry.validate()?;
        let expected = geometry.voxel_count();
        if labels.len() != expected {
            return Err(GridError::LengthMismatch {
                what: "labels",
                got: labels.len(),
                expected,
            });
        }
        if let Some(index) = labels.iter().position(|&l| l as usize >= taxonomy.len()) {
            return Err(GridError::LabelOutOfRange {
                label: labels[index],
                index,
                classes: taxonomy.len(),
            });
        }
        Ok(Self {
            geometry,
            taxonomy,
            labels,
            instances: None,
            visible: None,
        })
    }

    /// A grid where every voxel is free.
    pub fn empty(geometry: GridGeometry, taxonomy: ClassTaxonomy) -> Result<Self, GridError> {
        let labels = vec![taxonomy.free_label(); geometry.voxel_count()];
        Self::new(geometry, taxonomy, labels)
    }

    pub fn with_instances(mut self, instances: Vec<u16>) -> Result<Self, GridError> {
        if instances.len() != self.labels.len() {
            return Err(GridError::LengthMismatch {
                what: "instances",
                got: instances.len(),
                expected: self.labels.len(),
            });
        }
        self.instances = Some(instances);
        Ok(self)
    }

    pub fn with_visible(mut self, visible: Vec<bool>) -> Result<Self, GridError> {
        if visible.len() != self.labels.len() {
            return Err(GridError::LengthMismatch {
                what: "visible mask",
                got: visible.len(),
                expected: self.labels.len(),
            });
        }
        self.visible = Some(visible);
        Ok(self)
    }

    pub fn without_instances(mut self) -> Self {
        self.instances = None;
        self
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn dims(&self) -> [usize; 3] {
        self.geometry.dims
    }

    pub fn origin(&self) -> Vec3 {
        self.geometry.origin
    }

    pub fn voxel_size(&self) -> f64 {
        self.geometry.voxel_size
    }

    pub fn taxonomy(&self) -> &ClassTaxonomy {
        &self.taxonomy
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn instances(&self) -> Option<&[u16]> {
        self.instances.as_deref()
    }

    pub fn visible(&self) -> Option<&[bool]> {
        self.visible.as_deref()
    }

    pub fn voxel_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, c: VoxelCoord) -> u8 {
        self.labels[self.geometry.linear_index(c)]
    }

    pub fn instance(&self, c: VoxelCoord) -> u16 {
        self.instances
            .as_ref()
            .map_or(0, |ids| ids[self.geometry.linear_index(c)])
    }

    pub fn is_free(&self, c: VoxelCoord) -> bool {
        self.label(c) == self.taxonomy.free_label()
    }

    pub fn set_label(&mut self, c: VoxelCoord, label: u8) -> Result<(), GridError> {
        if !self.geometry.contains(c) {
            return Err(GridError::CoordOutOfRange {
                coord: c.to_array(),
                dims: self.geometry.dims,
            });
        }
        if label as usize >= self.taxonomy.len() {
            return Err(GridError::LabelOutOfRange {
                label,
                index: self.geometry.linear_index(c),
                classes: self.taxonomy.len(),
            });
        }
        let i = self.geometry.linear_index(c);
        self.labels[i] = label;
        Ok(())
    }

    pub fn set_instance(&mut self, c: VoxelCoord, id: u16) -> Result<(), GridError> {
        if !self.geometry.contains(c) {
            return Err(GridError::CoordOutOfRange {
                coord: c.to_array(),
                dims: self.geometry.dims,
            });
        }
        let n = self.labels.len();
        let i = self.geometry.linear_index(c);
        self.instances.get_or_insert_with(|| vec![0; n])[i] = id;
        Ok(())
    }

    pub fn world_to_voxel(&self, point: &Vec3) -> Option<VoxelCoord> {
        self.geometry.world_to_voxel(point)
    }

    pub fn voxel_center(&self, c: VoxelCoord) -> Result<Vec3, GridError> {
        self.geometry.voxel_center(c)
    }

    /// Errors unless `other` has the same dims, origin and voxel size.
    pub fn check_same_geometry(&self, other: &VoxelGrid) -> Result<(), GridError> {
        let (a, b) = (&self.geometry, &other.geometry);
        if a.dims != b.dims {
            return Err(GridError::GeometryMismatch("dims"));
        }
        if a.origin != b.origin {
            return Err(GridError::GeometryMismatch("origin"));
        }
        if a.voxel_size != b.voxel_size {
            return Err(GridError::GeometryMismatch("voxel size"));
        }
        Ok(())
    }
}
