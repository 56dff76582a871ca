use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SynthError;
use crate::grid::{
    instances_from_boxes, Box3D, ClassTaxonomy, GridGeometry, VoxelCoord, VoxelGrid,
    DEFAULT_THING_NAMES,
};
use crate::Vec3;

const ATTEMPTS_PER_BOX: usize = 200;

/// 64 x 64 x 8 voxels of 0.4 m with the ground's top face at z = 0.
pub fn instance_scene_geometry() -> GridGeometry {
    GridGeometry {
        dims: [64, 64, 8],
        origin: Vec3::new(-12.8, -12.8, -0.4),
        voxel_size: 0.4,
    }
}

#[derive(Clone, Copy)]
struct Block {
    lo: [usize; 3],
    size: [usize; 3],
}

impl Block {
    /// True when the blocks are closer than one voxel on every axis.
    fn crowds(&self, other: &Block) -> bool {
        (0..3).all(|a| {
            self.lo[a] < other.lo[a] + other.size[a] + 1
                && other.lo[a] < self.lo[a] + self.size[a] + 1
        })
    }
}

/// Seeded scene of `n_boxes` separated thing boxes standing on a ground layer.
///
/// The bottom voxel layer is `driveable_surface`; boxes are axis-aligned,
/// voxel-aligned, at least one voxel apart, and get instance ids 1..=n in order.
/// The same seed and geometry always give the same scene.
pub fn make_instance_scene(
    seed: u64,
    n_boxes: usize,
    geometry: GridGeometry,
) -> Result<(VoxelGrid, Vec<Box3D>), SynthError> {
    geometry.validate()?;
    let [w, h, d] = geometry.dims;
    if w < 4 || h < 4 || d < 3 {
        return Err(SynthError::Spec(
            "instance scenes need at least 4 x 4 x 3 voxels".into(),
        ));
    }
    if n_boxes == 0 || n_boxes > u16::MAX as usize {
        return Err(SynthError::Spec(format!(
            "box count {n_boxes} out of range"
        )));
    }
    let taxonomy = ClassTaxonomy::default();
    let ground = taxonomy
        .index_of("driveable_surface")
        .expect("default taxonomy") as u8;
    let things: Vec<usize> = DEFAULT_THING_NAMES
        .iter()
        .map(|n| taxonomy.index_of(n).expect("default taxonomy"))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_size = [w.min(6), h.min(6), (d - 1).min(4)];
    let mut blocks: Vec<(Block, usize)> = Vec::with_capacity(n_boxes);
    let mut attempts = 0;
    while blocks.len() < n_boxes {
        if attempts == ATTEMPTS_PER_BOX * n_boxes {
            return Err(SynthError::Placement { seed, n_boxes });
        }
        attempts += 1;
        let size = [
            rng.gen_range(2..=max_size[0]),
            rng.gen_range(2..=max_size[1]),
            rng.gen_range(2.min(max_size[2])..=max_size[2]),
        ];
        let lo = [
            rng.gen_range(0..=w - size[0]),
            rng.gen_range(0..=h - size[1]),
            1,
        ];
        let class = things[rng.gen_range(0..things.len())];
        let block = Block { lo, size };
        if blocks.iter().all(|(b, _)| !b.crowds(&block)) {
            blocks.push((block, class));
        }
    }

    let mut grid = VoxelGrid::empty(geometry, taxonomy)?;
    for x in 0..w {
        for y in 0..h {
            grid.set_label(VoxelCoord::new(x, y, 0), ground)?;
        }
    }
    let vs = geometry.voxel_size;
    let mut boxes = Vec::with_capacity(n_boxes);
    for (b, class) in &blocks {
        for x in b.lo[0]..b.lo[0] + b.size[0] {
            for y in b.lo[1]..b.lo[1] + b.size[1] {
                for z in b.lo[2]..b.lo[2] + b.size[2] {
                    grid.set_label(VoxelCoord::new(x, y, z), *class as u8)?;
                }
            }
        }
        let lo = geometry.origin + Vec3::new(b.lo[0] as f64, b.lo[1] as f64, b.lo[2] as f64) * vs;
        let size = Vec3::new(b.size[0] as f64, b.size[1] as f64, b.size[2] as f64) * vs;
        boxes.push(Box3D::axis_aligned(lo + size / 2.0, size, *class));
    }
    let ids = instances_from_boxes(&grid, &boxes)?;
    Ok((grid.with_instances(ids)?, boxes))
}

/// Copy of `grid` with instance `id` removed: its voxels become free, id 0.
pub fn drop_instance(grid: &VoxelGrid, id: u16) -> Result<VoxelGrid, SynthError> {
    let free = grid.taxonomy().free_label();
    let Some(ids) = grid.instances() else {
        return Ok(grid.clone());
    };
    let mut labels = grid.labels().to_vec();
    let mut new_ids = ids.to_vec();
    for (i, v) in new_ids.iter_mut().enumerate() {
        if *v == id && id != 0 {
            *v = 0;
            labels[i] = free;
        }
    }
    let mut out = VoxelGrid::new(*grid.geometry(), grid.taxonomy().clone(), labels)?
        .with_instances(new_ids)?;
    if let Some(mask) = grid.visible() {
        out = out.with_visible(mask.to_vec())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_scenes_are_reproducible() {
        let g = instance_scene_geometry();
        let (a, boxes_a) = make_instance_scene(7, 5, g).unwrap();
        let (b, boxes_b) = make_instance_scene(7, 5, g).unwrap();
        assert_eq!(a, b);
        assert_eq!(boxes_a, boxes_b);
        let (c, _) = make_instance_scene(8, 5, g).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn every_box_gets_its_voxels() {
        let g = instance_scene_geometry();
        let (grid, boxes) = make_instance_scene(3, 6, g).unwrap();
        let ids = grid.instances().unwrap();
        for (k, b) in boxes.iter().enumerate() {
            let id = (k + 1) as u16;
            let expected = (b.size / g.voxel_size)
                .iter()
                .map(|v| v.round() as usize)
                .product::<usize>();
            assert_eq!(ids.iter().filter(|&&v| v == id).count(), expected);
        }
        assert!(ids
            .iter()
            .zip(grid.labels())
            .all(|(&i, &l)| (i == 0) == (l == 11 || l == 17)));
        let ground = grid.labels().iter().filter(|&&l| l == 11).count();
        assert_eq!(ground, 64 * 64);
    }

    #[test]
    fn crowded_scene_fails() {
        let g = GridGeometry::new([6, 6, 3], Vec3::zeros(), 1.0).unwrap();
        assert!(matches!(
            make_instance_scene(1, 20, g),
            Err(SynthError::Placement {
                seed: 1,
                n_boxes: 20
            })
        ));
        assert!(make_instance_scene(1, 0, g).is_err());
    }

    #[test]
    fn dropping_an_instance_frees_it() {
        let (grid, _) = make_instance_scene(11, 3, instance_scene_geometry()).unwrap();
        let dropped = drop_instance(&grid, 2).unwrap();
        assert!(dropped.instances().unwrap().iter().all(|&v| v != 2));
        let before = grid.labels().iter().filter(|&&l| l != 17).count();
        let after = dropped.labels().iter().filter(|&&l| l != 17).count();
        let size = grid
            .instances()
            .unwrap()
            .iter()
            .filter(|&&v| v == 2)
            .count();
        assert_eq!(before - after, size);
    }
}
