//! First-hit ray casting through voxel grids.
//!
//! [`Traversal`] walks the voxels pierced by a ray in increasing ray-parameter
//! order (Amanatides & Woo style incremental axis stepping), so the cost per
//! visited voxel is constant. Cells are half-open `[min, max)` per axis: a point on
//! a shared face belongs to the higher-index cell. When two axes reach a boundary at
//! the same parameter, x steps before y before z.
//!
//! [`oracle_march`] is a deliberately naive fixed-step sampler used to check the
//! traversal.

mod oracle;
mod traversal;

pub use oracle::oracle_march;
pub use traversal::Traversal;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::RayError;
use crate::grid::{VoxelCoord, VoxelGrid};
use crate::raygen::RaySet;
use crate::Vec3;

/// Range used when none is configured; longer than the default grid diagonal.
pub const DEFAULT_MAX_RANGE: f64 = 80.0;

/// Unit-norm tolerance for ray directions.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// First non-free voxel along a ray.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    /// Ray parameter (meters) where the ray enters the voxel; 0 if it starts inside.
    pub distance: f64,
    pub coord: VoxelCoord,
    pub class_index: usize,
    /// 0 when the grid carries no instances or the voxel has none.
    pub instance_id: u16,
}

pub(crate) fn check_ray(origin: &Vec3, direction: &Vec3, max_range: f64) -> Result<(), RayError> {
    if !origin.iter().chain(direction.iter()).all(|v| v.is_finite()) {
        return Err(RayError::NonFinite);
    }
    let norm = direction.norm();
    if norm == 0.0 {
        return Err(RayError::ZeroDirection);
    }
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(RayError::NotUnit(norm));
    }
    if !(max_range > 0.0) {
        return Err(RayError::BadRange(max_range));
    }
    Ok(())
}

/// Casts one ray and returns the first non-free voxel within `max_range`, if any.
pub fn cast_ray(
    grid: &VoxelGrid,
    origin: &Vec3,
    direction: &Vec3,
    max_range: f64,
) -> Result<Option<Hit>, RayError> {
    let free = grid.taxonomy().free_label();
    let labels = grid.labels();
    let geometry = grid.geometry();
    for (coord, distance) in Traversal::new(geometry, origin, direction, max_range)? {
        let idx = geometry.linear_index(coord);
        let label = labels[idx];
        if label != free {
            return Ok(Some(Hit {
                distance,
                coord,
                class_index: label as usize,
                instance_id: grid.instances().map_or(0, |ids| ids[idx]),
            }));
        }
    }
    Ok(None)
}

/// Casts every ray of `rays`, in parallel on the current rayon pool. Output order
/// matches input order and does not depend on the number of threads.
pub fn cast_batch(
    grid: &VoxelGrid,
    rays: &RaySet,
    max_range: f64,
) -> Vec<Result<Option<Hit>, RayError>> {
    rays.rays
        .par_iter()
        .with_min_len(256)
        .map(|r| cast_ray(grid, &r.origin, &r.direction, max_range))
        .collect()
}
