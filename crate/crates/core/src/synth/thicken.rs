use crate::error::SynthError;
use crate::grid::VoxelGrid;
use crate::raycast::Traversal;
use crate::Vec3;

/// Thickens every surface seen from `viewpoint` by filling the voxels behind it.
///
/// A voxel is visible when some ray of `pattern` passes through it before or at
/// its first hit. Each ray that hits something keeps walking past the hit and
/// stamps the hit's class (and instance) onto the non-visible voxels it crosses;
/// the first ray in pattern order to reach a voxel wins. Visible voxels are never
/// touched, so every pattern ray from `viewpoint` still has the same first hit.
pub fn thicken_behind(
    grid: &VoxelGrid,
    viewpoint: &Vec3,
    pattern: &[Vec3],
    max_range: f64,
) -> Result<VoxelGrid, SynthError> {
    let geometry = *grid.geometry();
    let free = grid.taxonomy().free_label();
    let labels = grid.labels();
    let mut visible = vec![false; grid.voxel_count()];
    let mut behind = Vec::new();
    for dir in pattern {
        let mut walk = Traversal::new(&geometry, viewpoint, dir, max_range)?;
        for (coord, _) in walk.by_ref() {
            let idx = geometry.linear_index(coord);
            visible[idx] = true;
            if labels[idx] != free {
                behind.push((walk.clone(), idx));
                break;
            }
        }
    }

    let mut out_labels = labels.to_vec();
    let mut out_ids = grid.instances().map(<[u16]>::to_vec);
    let mut stamped = visible;
    for (walk, hit) in behind {
        for (coord, _) in walk {
            let idx = geometry.linear_index(coord);
            if stamped[idx] {
                continue;
            }
            stamped[idx] = true;
            out_labels[idx] = labels[hit];
            if let Some(ids) = out_ids.as_mut() {
                ids[idx] = ids[hit];
            }
        }
    }
    let mut out = VoxelGrid::new(geometry, grid.taxonomy().clone(), out_labels)?;
    if let Some(ids) = out_ids {
        out = out.with_instances(ids)?;
    }
    if let Some(mask) = grid.visible() {
        out = out.with_visible(mask.to_vec())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ClassTaxonomy, GridGeometry, VoxelCoord};
    use crate::raycast::cast_ray;

    #[test]
    fn fills_behind_a_single_voxel() {
        let g = GridGeometry::new([6, 1, 1], Vec3::zeros(), 1.0).unwrap();
        let mut grid = VoxelGrid::empty(g, ClassTaxonomy::default()).unwrap();
        grid.set_label(VoxelCoord::new(2, 0, 0), 4).unwrap();
        let vp = Vec3::new(0.5, 0.5, 0.5);
        let thick = thicken_behind(&grid, &vp, &[Vec3::x()], 80.0).unwrap();
        assert_eq!(thick.labels(), &[17, 17, 4, 4, 4, 4]);
        let short = thicken_behind(&grid, &vp, &[Vec3::x()], 3.0).unwrap();
        assert_eq!(short.labels(), &[17, 17, 4, 4, 17, 17]);
    }

    #[test]
    fn first_hits_are_preserved() {
        let g = GridGeometry::new([12, 12, 4], Vec3::zeros(), 0.5).unwrap();
        let mut grid = VoxelGrid::empty(g, ClassTaxonomy::default()).unwrap();
        for (x, y, c) in [(8, 3, 4), (9, 9, 10), (2, 10, 15), (5, 6, 7)] {
            for z in 0..4 {
                grid.set_label(VoxelCoord::new(x, y, z), c).unwrap();
            }
        }
        let vp = Vec3::new(3.0, 3.0, 1.0);
        let pattern: Vec<Vec3> = (0..64)
            .map(|j| {
                let a = j as f64 * std::f64::consts::TAU / 64.0;
                Vec3::new(a.cos(), a.sin(), -0.1).normalize()
            })
            .collect();
        let thick = thicken_behind(&grid, &vp, &pattern, 80.0).unwrap();
        assert!(thick.labels().iter().filter(|&&l| l != 17).count() > 16);
        for d in &pattern {
            assert_eq!(
                cast_ray(&grid, &vp, d, 80.0).unwrap(),
                cast_ray(&thick, &vp, d, 80.0).unwrap()
            );
        }
    }
}
