use crate::error::RayError;
use crate::grid::{GridGeometry, VoxelCoord};
use crate::Vec3;

use super::check_ray;

/// Iterator over the voxels a ray passes through, yielding each voxel with the
/// distance (meters) at which the ray enters it.
///
/// The ray is clipped to the grid bounds with the slab method. Entry distances are
/// non-decreasing and never exceed `max_range`.
#[derive(Clone, Debug)]
pub struct Traversal {
    dims: [i64; 3],
    /// Ray origin in voxel units relative to the grid's minimum corner.
    local_origin: [f64; 3],
    inv_dir: [f64; 3],
    step: [i64; 3],
    cell: [i64; 3],
    /// Parameter (voxel units) at which the ray crosses the next boundary on each axis.
    t_max: [f64; 3],
    /// Entry parameter of `cell`, voxel units.
    t: f64,
    voxel_size: f64,
    max_range: f64,
    done: bool,
}

impl Traversal {
    pub fn new(
        geometry: &GridGeometry,
        origin: &Vec3,
        direction: &Vec3,
        max_range: f64,
    ) -> Result<Self, RayError> {
        check_ray(origin, direction, max_range)?;
        let vs = geometry.voxel_size;
        let dims = geometry.dims.map(|d| d as i64);
        let mut local_origin = [0.0; 3];
        let mut inv_dir = [0.0; 3];
        let mut step = [0i64; 3];
        let mut t_enter = f64::NEG_INFINITY;
        let mut t_exit = f64::INFINITY;
        let mut outside_slab = false;
        for a in 0..3 {
            let q = (origin[a] - geometry.origin[a]) / vs;
            let u = direction[a];
            local_origin[a] = q;
            if u == 0.0 {
                inv_dir[a] = f64::INFINITY;
                if q < 0.0 || q >= dims[a] as f64 {
                    outside_slab = true;
                }
            } else {
                inv_dir[a] = 1.0 / u;
                step[a] = if u > 0.0 { 1 } else { -1 };
                let t0 = (0.0 - q) * inv_dir[a];
                let t1 = (dims[a] as f64 - q) * inv_dir[a];
                t_enter = t_enter.max(t0.min(t1));
                t_exit = t_exit.min(t0.max(t1));
            }
        }

        let mut traversal = Self {
            dims,
            local_origin,
            inv_dir,
            step,
            cell: [0; 3],
            t_max: [f64::INFINITY; 3],
            t: 0.0,
            voxel_size: vs,
            max_range,
            done: true,
        };
        let t_start = t_enter.max(0.0);
        if outside_slab || t_exit <= t_start || t_start * vs > max_range {
            return Ok(traversal);
        }

        for a in 0..3 {
            let p = local_origin[a] + t_start * direction[a];
            // clamp absorbs the entry face landing a rounding error outside the grid
            let c = (p.floor() as i64).clamp(0, dims[a] - 1);
            traversal.cell[a] = c;
            traversal.t_max[a] = traversal.boundary_t(a, c);
        }
        traversal.t = t_start;
        traversal.done = false;
        Ok(traversal)
    }

    fn boundary_t(&self, axis: usize, cell: i64) -> f64 {
        match self.step[axis] {
            0 => f64::INFINITY,
            1 => ((cell + 1) as f64 - self.local_origin[axis]) * self.inv_dir[axis],
            _ => (cell as f64 - self.local_origin[axis]) * self.inv_dir[axis],
        }
    }
}

impl Iterator for Traversal {
    type Item = (VoxelCoord, f64);

    #[inline]
    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let current = VoxelCoord::new(
            self.cell[0] as usize,
            self.cell[1] as usize,
            self.cell[2] as usize,
        );
        let entry = self.t * self.voxel_size;

        let [tx, ty, tz] = self.t_max;
        let axis = if tx <= ty && tx <= tz {
            0
        } else if ty <= tz {
            1
        } else {
            2
        };
        let t_next = self.t_max[axis].max(self.t);
        let c = self.cell[axis] + self.step[axis];
        if !t_next.is_finite()
            || c < 0
            || c >= self.dims[axis]
            || t_next * self.voxel_size > self.max_range
        {
            self.done = true;
        } else {
            self.cell[axis] = c;
            self.t_max[axis] = self.boundary_t(axis, c);
            self.t = t_next;
        }
        Some((current, entry))
    }
}
