use serde::{Deserialize, Serialize};

use super::{VoxelCoord, VoxelGrid};
use crate::error::GridError;
use crate::Vec3;

/// Oriented 3D box: `size` is (length, width, height), `yaw` rotates about +z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    pub center: Vec3,
    pub size: Vec3,
    pub yaw: f64,
    pub class_index: usize,
}

impl Box3D {
    pub fn axis_aligned(center: Vec3, size: Vec3, class_index: usize) -> Self {
        Self {
            center,
            size,
            yaw: 0.0,
            class_index,
        }
    }

    /// Closed-box membership after undoing the yaw rotation.
    pub fn contains(&self, p: &Vec3) -> bool {
        let d = p - self.center;
        let (s, c) = self.yaw.sin_cos();
        let lx = c * d.x + s * d.y;
        let ly = -s * d.x + c * d.y;
        lx.abs() <= 0.5 * self.size.x
            && ly.abs() <= 0.5 * self.size.y
            && d.z.abs() <= 0.5 * self.size.z
    }

    /// World-space half extents of the rotated box's axis-aligned hull.
    fn half_extents(&self) -> Vec3 {
        let (s, c) = self.yaw.sin_cos();
        let (hx, hy) = (0.5 * self.size.x, 0.5 * self.size.y);
        Vec3::new(
            (c * hx).abs() + (s * hy).abs(),
            (s * hx).abs() + (c * hy).abs(),
            0.5 * self.size.z,
        )
    }
}

/// Instance IDs from boxes: voxel gets `i + 1` when its center lies in box `i` and its
/// label equals the box class. The earliest box in the list wins overlaps.
pub fn instances_from_boxes(grid: &VoxelGrid, boxes: &[Box3D]) -> Result<Vec<u16>, GridError> {
    if boxes.len() > u16::MAX as usize {
        return Err(GridError::BadBox(format!(
            "{} boxes exceed the u16 instance range",
            boxes.len()
        )));
    }
    let taxonomy = grid.taxonomy();
    for (i, b) in boxes.iter().enumerate() {
        if !b.size.iter().all(|&v| v.is_finite() && v > 0.0) {
            return Err(GridError::BadBox(format!("box {i} has non-positive size")));
        }
        if !b.center.iter().all(|v| v.is_finite()) || !b.yaw.is_finite() {
            return Err(GridError::BadBox(format!("box {i} is not finite")));
        }
        if !taxonomy.is_semantic(b.class_index) {
            return Err(GridError::BadBox(format!(
                "box {i} class {} is not a semantic class",
                b.class_index
            )));
        }
    }

    let geometry = grid.geometry();
    let vs = geometry.voxel_size;
    let mut ids = vec![0u16; grid.voxel_count()];
    for (i, b) in boxes.iter().enumerate() {
        let half = b.half_extents();
        let mut range = [(0usize, 0usize); 3];
        for axis in 0..3 {
            let lo = ((b.center[axis] - half[axis] - geometry.origin[axis]) / vs).floor() - 1.0;
            let hi = ((b.center[axis] + half[axis] - geometry.origin[axis]) / vs).ceil() + 1.0;
            let n = geometry.dims[axis] as f64;
            range[axis] = (lo.clamp(0.0, n) as usize, hi.clamp(0.0, n) as usize);
        }
        for x in range[0].0..range[0].1 {
            for y in range[1].0..range[1].1 {
                for z in range[2].0..range[2].1 {
                    let c = VoxelCoord::new(x, y, z);
                    let idx = geometry.linear_index(c);
                    if ids[idx] != 0 || grid.labels()[idx] as usize != b.class_index {
                        continue;
                    }
                    if b.contains(&geometry.voxel_center(c)?) {
                        ids[idx] = (i + 1) as u16;
                    }
                }
            }
        }
    }
    Ok(ids)
}
