use std::collections::BTreeMap;
use std::fmt::Write as _;

use occray::metrics::{RayIoUReport, RayPqReport, VoxelClassIou, VoxelMiou};
use occray::raygen::LidarPatternConfig;
use serde::{Deserialize, Serialize};

/// Resolved evaluation settings, embedded in every report.
///
/// The thread count is deliberately absent: reports must not depend on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub pred: Vec<String>,
    pub gt: Vec<String>,
    pub traj: Vec<String>,
    pub thresholds_m: Vec<f64>,
    pub n_waypoints: usize,
    pub max_range: f64,
    pub pattern: LidarPatternConfig,
    /// "trajectory" or "grid_center".
    pub origins: String,
    /// "micro" pools counts over samples; "per_sample_mean" averages sample scores.
    pub aggregation: String,
    pub voxel_miou: bool,
    pub use_visible_mask: bool,
    pub panoptic: bool,
    pub iou_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub pred: String,
    pub gt: String,
    pub waypoints: Vec<usize>,
    pub rays_total: u64,
    pub rays_excluded: u64,
    pub rayiou: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(flatten)]
    pub rays: RayIoUReport,
    pub per_sample: Vec<SampleSummary>,
    pub raypq: Option<RayPqReport>,
    pub voxel_miou: Option<VoxelMiou>,
    pub config: EvalConfig,
}

impl EvalReport {
    pub fn is_empty(&self) -> bool {
        self.rays.empty
    }
}

/// Sums intersections and unions class by class over samples.
pub(crate) fn pool_voxel_miou(parts: &[VoxelMiou]) -> Option<VoxelMiou> {
    let first = parts.first()?;
    let mut per_class: BTreeMap<String, VoxelClassIou> = BTreeMap::new();
    for part in parts {
        for (name, c) in &part.per_class {
            let e = per_class.entry(name.clone()).or_insert(VoxelClassIou {
                intersection: 0,
                union: 0,
                iou: None,
            });
            e.intersection += c.intersection;
            e.union += c.union;
        }
    }
    let mut sum = 0.0;
    let mut present = 0usize;
    for c in per_class.values_mut() {
        c.iou = (c.union > 0).then(|| c.intersection as f64 / c.union as f64);
        if let Some(v) = c.iou {
            sum += v;
            present += 1;
        }
    }
    Some(VoxelMiou {
        per_class,
        miou: if present == 0 {
            0.0
        } else {
            sum / present as f64
        },
        evaluated_voxels: parts.iter().map(|p| p.evaluated_voxels).sum(),
        masked: first.masked,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

pub(crate) fn render_table(report: &EvalReport) -> String {
    let r = &report.rays;
    let mut out = String::new();
    let _ = write!(out, "{:<22}", "class");
    for t in &r.per_threshold {
        let _ = write!(out, " {:>9}", format!("IoU@{}m", t.tau));
    }
    out.push('\n');
    if let Some(first) = r.per_threshold.first() {
        for name in first.per_class.keys() {
            let row: Vec<Option<f64>> = r
                .per_threshold
                .iter()
                .map(|t| t.per_class[name].iou)
                .collect();
            if row.iter().all(Option::is_none) {
                continue;
            }
            let _ = write!(out, "{name:<22}");
            for v in row {
                let _ = write!(out, " {:>9}", cell(v));
            }
            out.push('\n');
        }
    }
    let _ = write!(out, "{:<22}", "mean");
    for t in &r.per_threshold {
        let _ = write!(out, " {:>9.4}", t.mean);
    }
    out.push('\n');
    let _ = writeln!(
        out,
        "RayIoU {:.4}  ({} rays, {} excluded)",
        r.rayiou, r.rays_total, r.rays_excluded
    );
    if let Some(pq) = &report.raypq {
        let per: Vec<String> = pq
            .per_threshold
            .iter()
            .map(|t| format!("{:.4}@{}m", t.pq, t.tau))
            .collect();
        let _ = writeln!(
            out,
            "RayPQ  {:.4}  ({}; {} gt instances)",
            pq.raypq,
            per.join(" "),
            pq.gt_instances
        );
    }
    if let Some(v) = &report.voxel_miou {
        let _ = writeln!(
            out,
            "voxel mIoU {:.4}  ({} voxels{})",
            v.miou,
            v.evaluated_voxels,
            if v.masked { ", visible mask" } else { "" }
        );
    }
    if r.empty {
        out.push_str("warning: no ray hit the ground truth; scores are reported as 0\n");
    }
    out
}
