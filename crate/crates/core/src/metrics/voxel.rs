use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GridError, MetricsError};
use crate::grid::VoxelGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoxelClassIou {
    pub intersection: u64,
    pub union: u64,
    /// `null` when the class occurs in neither grid (within the mask).
    pub iou: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoxelMiou {
    pub per_class: BTreeMap<String, VoxelClassIou>,
    /// Mean over semantic classes present in either grid.
    pub miou: f64,
    pub evaluated_voxels: u64,
    pub masked: bool,
}

impl VoxelMiou {
    pub fn class_iou(&self, name: &str) -> Option<f64> {
        self.per_class.get(name)?.iou
    }
}

/// Voxel-level IoU per semantic class, restricted to voxels where `mask` is set.
pub fn voxel_miou(
    pred: &VoxelGrid,
    gt: &VoxelGrid,
    mask: Option<&[bool]>,
) -> Result<VoxelMiou, MetricsError> {
    gt.check_same_geometry(pred)?;
    if gt.taxonomy() != pred.taxonomy() {
        return Err(GridError::Taxonomy(
            "prediction and ground truth use different class lists".into(),
        )
        .into());
    }
    let n = gt.voxel_count();
    if let Some(m) = mask {
        if m.len() != n {
            return Err(GridError::LengthMismatch {
                what: "visible mask",
                got: m.len(),
                expected: n,
            }
            .into());
        }
    }
    let taxonomy = gt.taxonomy();
    let n_classes = taxonomy.len();
    let mut inter = vec![0u64; n_classes];
    let mut pred_count = vec![0u64; n_classes];
    let mut gt_count = vec![0u64; n_classes];
    let mut evaluated = 0u64;
    for (i, (&p, &g)) in pred.labels().iter().zip(gt.labels()).enumerate() {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        evaluated += 1;
        pred_count[p as usize] += 1;
        gt_count[g as usize] += 1;
        if p == g {
            inter[p as usize] += 1;
        }
    }

    let mut per_class = BTreeMap::new();
    let mut sum = 0.0;
    let mut present = 0usize;
    for c in taxonomy.semantic_classes() {
        let union = pred_count[c] + gt_count[c] - inter[c];
        let iou = (union > 0).then(|| inter[c] as f64 / union as f64);
        if let Some(v) = iou {
            sum += v;
            present += 1;
        }
        per_class.insert(
            taxonomy.name(c).unwrap_or_default().to_string(),
            VoxelClassIou {
                intersection: inter[c],
                union,
                iou,
            },
        );
    }
    Ok(VoxelMiou {
        per_class,
        miou: if present == 0 {
            0.0
        } else {
            sum / present as f64
        },
        evaluated_voxels: evaluated,
        masked: mask.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ClassTaxonomy, GridGeometry};
    use crate::Vec3;

    fn grid(labels: Vec<u8>) -> VoxelGrid {
        let g = GridGeometry::new([1, 1, labels.len()], Vec3::zeros(), 1.0).unwrap();
        VoxelGrid::new(g, ClassTaxonomy::default(), labels).unwrap()
    }

    #[test]
    fn identical_grids_score_one() {
        let g = grid(vec![17, 4, 4, 10, 17]);
        let r = voxel_miou(&g, &g, None).unwrap();
        assert_eq!(r.miou, 1.0);
        assert_eq!(r.class_iou("car"), Some(1.0));
        assert_eq!(r.class_iou("bus"), None);
        assert!(!r.per_class.contains_key("free"));
    }

    #[test]
    fn interval_arithmetic() {
        // gt car at [2, 3); pred car from 1 to 3 -> 1 / 2
        let gt = grid(vec![17, 17, 4, 17]);
        let pred = grid(vec![17, 4, 4, 17]);
        assert_eq!(
            voxel_miou(&pred, &gt, None).unwrap().class_iou("car"),
            Some(0.5)
        );
        let r = voxel_miou(&pred, &gt, Some(&[true, false, true, true])).unwrap();
        assert_eq!(r.class_iou("car"), Some(1.0));
        assert_eq!(r.evaluated_voxels, 3);
    }

    #[test]
    fn mismatched_inputs() {
        let a = grid(vec![17; 4]);
        let b = grid(vec![17; 5]);
        assert!(matches!(
            voxel_miou(&a, &b, None),
            Err(MetricsError::Grid(_))
        ));
        assert!(voxel_miou(&a, &a, Some(&[true])).is_err());
        let g = GridGeometry::new([1, 1, 4], Vec3::new(1.0, 0.0, 0.0), 1.0).unwrap();
        let moved = VoxelGrid::new(g, a.taxonomy().clone(), a.labels().to_vec()).unwrap();
        assert!(voxel_miou(&a, &moved, None).is_err());
    }
}
