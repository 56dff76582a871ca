//! Ray-level and voxel-level occupancy metrics.
//!
//! A query ray is cast into both the ground truth and the prediction. Rays that hit
//! nothing in the ground truth are excluded. A ray is a true positive for class `c`
//! when both first hits carry class `c` and their depths differ by at most the
//! threshold; any other ray with a ground-truth hit is a false negative for the
//! ground-truth class, and additionally a false positive for the predicted class when
//! the prediction hit something.

mod panoptic;
mod rayiou;
mod voxel;

pub use panoptic::{
    match_instances, ray_instance_iou, raypq, ClassPq, InstanceKey, InstancePairIou, MatchedPair,
    PanopticAccumulator, PqAtThreshold, RayPqReport, DEFAULT_IOU_THRESHOLD,
};
pub use rayiou::{
    classify_ray, rayiou, ClassCounts, ClassIou, ConfusionCounts, RayEvalSample, RayIoUReport,
    RayOutcome, ThresholdReport, DEFAULT_THRESHOLDS,
};
pub use voxel::{voxel_miou, VoxelClassIou, VoxelMiou};

use rayon::prelude::*;

use crate::error::{MetricsError, RayError};
use crate::grid::VoxelGrid;
use crate::raycast::cast_ray;
use crate::raygen::RaySet;

/// Casts every ray into both grids. Parallel; output order follows `rays`.
pub fn sample_rays(
    gt: &VoxelGrid,
    pred: &VoxelGrid,
    rays: &RaySet,
    max_range: f64,
) -> Result<Vec<RayEvalSample>, RayError> {
    rays.rays
        .par_iter()
        .with_min_len(256)
        .map(|r| {
            Ok(RayEvalSample {
                gt: cast_ray(gt, &r.origin, &r.direction, max_range)?,
                pred: cast_ray(pred, &r.origin, &r.direction, max_range)?,
            })
        })
        .collect()
}

pub(crate) fn check_thresholds(thresholds: &[f64]) -> Result<(), MetricsError> {
    if thresholds.is_empty() {
        return Err(MetricsError::NoThresholds);
    }
    for &t in thresholds {
        check_tau(t)?;
    }
    Ok(())
}

pub(crate) fn check_tau(tau: f64) -> Result<(), MetricsError> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(MetricsError::BadThreshold(tau))
    }
}
