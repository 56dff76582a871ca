use serde::{Deserialize, Serialize};

use crate::error::SynthError;
use crate::grid::{ClassTaxonomy, GridGeometry, VoxelCoord, VoxelGrid};
use crate::Vec3;

const ALIGN_TOLERANCE: f64 = 1e-6;

/// A wall facing the viewpoint across the +x axis, and a displaced prediction of it.
///
/// Distances are measured from `viewpoint` along +x and must land on voxel faces.
/// The ground-truth slab spans `[d, d + d_v)`; the predicted front face sits at
/// `d + shift`. With `fill_behind`, the prediction extends from its front face to
/// `pred_far_bound`, which defaults to `max(d + d_v, d + shift + d_v)`: the
/// ground-truth far face, or one wall thickness when the prediction lies beyond it.
/// That default reproduces the voxel IoUs 0, 1/2, 1/3 for shifts `+d_v, -d_v,
/// -2 d_v` with or without a visible mask. Setting it to the grid extent reproduces
/// them only under the ground-truth visible mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallSceneSpec {
    pub geometry: GridGeometry,
    pub taxonomy: ClassTaxonomy,
    pub viewpoint: Vec3,
    pub d: f64,
    pub d_v: f64,
    /// Positive moves the prediction away from the viewpoint.
    pub shift: f64,
    pub fill_behind: bool,
    pub pred_far_bound: Option<f64>,
    pub wall_class: usize,
}

impl Default for WallSceneSpec {
    fn default() -> Self {
        let taxonomy = ClassTaxonomy::default();
        Self {
            geometry: GridGeometry::default(),
            wall_class: taxonomy.index_of("manmade").expect("default taxonomy"),
            taxonomy,
            viewpoint: Vec3::new(0.0, 0.0, 2.0),
            d: 10.0,
            d_v: 0.4,
            shift: -0.4,
            fill_behind: true,
            pred_far_bound: None,
        }
    }
}

impl WallSceneSpec {
    fn voxels(&self, meters: f64, what: &str) -> Result<i64, SynthError> {
        let v = meters / self.geometry.voxel_size;
        let r = v.round();
        if (v - r).abs() > ALIGN_TOLERANCE || !v.is_finite() {
            return Err(SynthError::Spec(format!(
                "{what} = {meters} m is not a multiple of the voxel size {}",
                self.geometry.voxel_size
            )));
        }
        Ok(r as i64)
    }

    /// Grid x index of the face at `distance` meters in front of the viewpoint.
    fn face_index(&self, distance: f64, what: &str) -> Result<i64, SynthError> {
        self.voxels(self.viewpoint.x + distance - self.geometry.origin.x, what)
    }

    pub fn thickness_voxels(&self) -> Result<usize, SynthError> {
        Ok(self.voxels(self.d_v, "d_v")?.max(0) as usize)
    }

    /// Closed-form count of ground-truth wall voxels.
    pub fn gt_wall_voxel_count(&self) -> Result<usize, SynthError> {
        let [_, h, d] = self.geometry.dims;
        Ok(self.thickness_voxels()? * h * d)
    }

    pub fn resolved_far_bound(&self) -> f64 {
        self.pred_far_bound
            .unwrap_or_else(|| (self.d + self.d_v).max(self.d + self.shift + self.d_v))
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        self.geometry.validate()?;
        if !(self.d > 0.0) {
            return Err(SynthError::Spec("d must be positive".into()));
        }
        if self.d_v < self.geometry.voxel_size * (1.0 - ALIGN_TOLERANCE) {
            return Err(SynthError::Spec("d_v must be at least one voxel".into()));
        }
        if !self.taxonomy.is_semantic(self.wall_class) {
            return Err(SynthError::Spec(format!(
                "wall class {} is not a semantic class",
                self.wall_class
            )));
        }
        self.voxels(self.shift, "shift")?;
        Ok(())
    }
}

/// Builds the ground truth (with a visible mask covering everything up to and
/// including the wall) and the prediction.
pub fn make_wall_scene(spec: &WallSceneSpec) -> Result<(VoxelGrid, VoxelGrid), SynthError> {
    spec.validate()?;
    let w = spec.geometry.dims[0] as i64;
    let gt_front = spec.face_index(spec.d, "d")?;
    let gt_back = gt_front + spec.thickness_voxels()? as i64;
    if gt_front < 0 || gt_back > w {
        return Err(SynthError::Spec(format!(
            "wall slab x in [{gt_front}, {gt_back}) lies outside the grid (W = {w})"
        )));
    }
    let pred_front = spec.face_index(spec.d + spec.shift, "d + shift")?;
    let pred_back = if spec.fill_behind {
        spec.face_index(spec.resolved_far_bound(), "pred_far_bound")?
            .min(w)
    } else {
        pred_front + (gt_back - gt_front)
    };
    if pred_front < 0 || pred_back > w || pred_back <= pred_front {
        return Err(SynthError::Spec(format!(
            "predicted slab x in [{pred_front}, {pred_back}) lies outside the grid (W = {w})"
        )));
    }

    let label = spec.wall_class as u8;
    let slab = |grid: &mut VoxelGrid, x0: i64, x1: i64| -> Result<(), SynthError> {
        let [_, h, d] = spec.geometry.dims;
        for x in x0 as usize..x1 as usize {
            for y in 0..h {
                for z in 0..d {
                    grid.set_label(VoxelCoord::new(x, y, z), label)?;
                }
            }
        }
        Ok(())
    };
    let mut gt = VoxelGrid::empty(spec.geometry, spec.taxonomy.clone())?;
    slab(&mut gt, gt_front, gt_back)?;
    let visible = (0..gt.voxel_count())
        .map(|i| (spec.geometry.coord_of(i).x as i64) < gt_back)
        .collect();
    let gt = gt.with_visible(visible)?;
    let mut pred = VoxelGrid::empty(spec.geometry, spec.taxonomy.clone())?;
    slab(&mut pred, pred_front, pred_back)?;
    Ok((gt, pred))
}
