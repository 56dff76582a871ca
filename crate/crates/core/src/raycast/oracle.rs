use crate::error::RayError;
use crate::grid::VoxelGrid;
use crate::Vec3;

use super::{check_ray, Hit};

/// Brute-force first-hit search: samples `origin + k * step * direction` for
/// `k = 0, 1, ...` up to `max_range` and reports the first sample inside a non-free
/// voxel, with `distance` set to the sampled parameter.
///
/// Sampling can step over a voxel the ray crosses for less than `step`, so this is
/// only an oracle for rays that do not clip voxel edges.
pub fn oracle_march(
    grid: &VoxelGrid,
    origin: &Vec3,
    direction: &Vec3,
    max_range: f64,
    step: f64,
) -> Result<Option<Hit>, RayError> {
    check_ray(origin, direction, max_range)?;
    if !(step > 0.0 && step <= grid.voxel_size() / 4.0) {
        return Err(RayError::BadStep(step));
    }
    let geometry = grid.geometry();
    // no sample farther than this from the origin can land in the grid
    let center = (geometry.origin + geometry.max_corner()) * 0.5;
    let half_diagonal = (geometry.max_corner() - geometry.origin).norm() * 0.5;
    let reach = (origin - center).norm() + half_diagonal;
    let free = grid.taxonomy().free_label();

    let mut k: u64 = 0;
    loop {
        let t = k as f64 * step;
        if t > max_range || t > reach + step {
            return Ok(None);
        }
        let p = origin + direction * t;
        if let Some(coord) = grid.world_to_voxel(&p) {
            let label = grid.label(coord);
            if label != free {
                return Ok(Some(Hit {
                    distance: t,
                    coord,
                    class_index: label as usize,
                    instance_id: grid.instance(coord),
                }));
            }
        }
        k += 1;
    }
}
