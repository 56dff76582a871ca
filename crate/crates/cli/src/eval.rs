use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use occray::grid::{ClassTaxonomy, VoxelGrid};
use occray::metrics::{
    sample_rays, voxel_miou, ConfusionCounts, PanopticAccumulator, RayIoUReport,
};
use occray::raygen::{build_query_rays, lidar_pattern, temporal_indices, Pose};
use occray::Vec3;

use crate::args::EvalArgs;
use crate::report::{pool_voxel_miou, render_table, EvalConfig, EvalReport, SampleSummary};
use crate::{load, load_trajectory};

pub struct EvalOutcome {
    pub report: EvalReport,
    /// Exactly the bytes written to `--out`.
    pub json: String,
    pub table: String,
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn resolve_config(args: &EvalArgs) -> Result<EvalConfig> {
    ensure!(
        args.pred.len() == args.gt.len(),
        "got {} --pred files but {} --gt files",
        args.pred.len(),
        args.gt.len()
    );
    ensure!(
        args.traj.len() <= 1 || args.traj.len() == args.gt.len(),
        "give one --traj for all samples or one per sample"
    );
    let mut thresholds = args.thresholds.clone();
    ensure!(!thresholds.is_empty(), "no thresholds given");
    for &t in &thresholds {
        ensure!(t > 0.0 && t.is_finite(), "threshold {t} must be positive");
    }
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    ensure!(args.n_waypoints >= 1, "--n-waypoints must be at least 1");
    ensure!(args.max_range > 0.0, "--max-range must be positive");
    ensure!(
        (0.0..=1.0).contains(&args.iou_threshold),
        "--iou-threshold must lie in [0, 1]"
    );
    ensure!(args.threads != Some(0), "--threads must be at least 1");
    let pattern = args.pattern.config();
    pattern.validate()?;
    Ok(EvalConfig {
        pred: args.pred.iter().map(|p| display(p)).collect(),
        gt: args.gt.iter().map(|p| display(p)).collect(),
        traj: args.traj.iter().map(|p| display(p)).collect(),
        thresholds_m: thresholds,
        n_waypoints: args.n_waypoints,
        max_range: args.max_range,
        pattern,
        origins: if args.traj.is_empty() {
            "grid_center"
        } else {
            "trajectory"
        }
        .into(),
        aggregation: if args.per_sample_mean {
            "per_sample_mean"
        } else {
            "micro"
        }
        .into(),
        voxel_miou: args.voxel_miou,
        use_visible_mask: args.use_visible_mask,
        panoptic: args.panoptic,
        iou_threshold: args.iou_threshold,
    })
}

/// Grid center in x/y at sensor height above z = 0.
fn center_pose(grid: &VoxelGrid, sensor_height: f64) -> Pose {
    let g = grid.geometry();
    let c = g.origin + (g.max_corner() - g.origin) / 2.0;
    Pose::at(Vec3::new(c.x, c.y, sensor_height), 0.0)
}

fn check_pair(pred: &VoxelGrid, gt: &VoxelGrid, pred_path: &Path, gt_path: &Path) -> Result<()> {
    gt.check_same_geometry(pred).with_context(|| {
        format!(
            "{} does not match the geometry of {}",
            pred_path.display(),
            gt_path.display()
        )
    })?;
    ensure!(
        gt.taxonomy() == pred.taxonomy(),
        "{} and {} use different class lists",
        pred_path.display(),
        gt_path.display()
    );
    Ok(())
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Replaces pooled headline scores by the mean over non-empty samples.
fn average_samples(pooled: &mut RayIoUReport, samples: &[RayIoUReport]) {
    let live: Vec<&RayIoUReport> = samples.iter().filter(|s| !s.empty).collect();
    for (ti, t) in pooled.per_threshold.iter_mut().enumerate() {
        t.mean = mean(live.iter().map(|s| s.per_threshold[ti].mean));
    }
    pooled.rayiou = mean(live.iter().map(|s| s.rayiou));
}

fn evaluate(args: &EvalArgs, config: &EvalConfig) -> Result<EvalReport> {
    let pattern = lidar_pattern(&config.pattern)?;
    let thresholds = &config.thresholds_m;
    let mut taxonomy: Option<ClassTaxonomy> = None;
    let mut counts: Option<ConfusionCounts> = None;
    let mut per_sample_reports = Vec::new();
    let mut per_sample = Vec::new();
    let mut panoptic = PanopticAccumulator::new();
    let mut sample_pq = Vec::new();
    let mut voxel_parts = Vec::new();

    for (i, (pred_path, gt_path)) in args.pred.iter().zip(&args.gt).enumerate() {
        let gt = load(gt_path)?;
        let pred = load(pred_path)?;
        check_pair(&pred, &gt, pred_path, gt_path)?;
        let tax = taxonomy.get_or_insert_with(|| gt.taxonomy().clone());
        ensure!(
            tax == gt.taxonomy(),
            "{} uses a different class list from the first sample",
            gt_path.display()
        );

        let traj = match args.traj.len() {
            0 => None,
            1 => Some(&args.traj[0]),
            _ => Some(&args.traj[i]),
        };
        let (poses, waypoints) = match traj {
            Some(path) => {
                let t = load_trajectory(path)?;
                let idx = temporal_indices(&t, config.n_waypoints)?;
                (idx.iter().map(|&k| t.poses()[k]).collect(), idx)
            }
            None => (
                vec![center_pose(&gt, config.pattern.sensor_height)],
                vec![0],
            ),
        };
        let rays = build_query_rays(&pattern, &poses)?;
        let samples = sample_rays(&gt, &pred, &rays, config.max_range)?;

        let mut c = ConfusionCounts::new(thresholds, tax.len())?;
        c.accumulate(&samples);
        let report = c.report(tax);
        per_sample.push(SampleSummary {
            pred: display(pred_path),
            gt: display(gt_path),
            waypoints,
            rays_total: report.rays_total,
            rays_excluded: report.rays_excluded,
            rayiou: report.rayiou,
        });
        per_sample_reports.push(report);
        match counts.as_mut() {
            Some(total) => total.merge(&c)?,
            None => counts = Some(c),
        }

        if config.panoptic {
            let index = u32::try_from(i).context("too many samples")?;
            panoptic.add_sample(index, &samples);
            if args.per_sample_mean {
                let mut own = PanopticAccumulator::new();
                own.add_sample(index, &samples);
                sample_pq.push(own.report(thresholds, tax, config.iou_threshold)?);
            }
        }
        if config.voxel_miou {
            let mask = if config.use_visible_mask {
                match gt.visible() {
                    Some(m) => Some(m),
                    None => bail!("{} has no visible mask", gt_path.display()),
                }
            } else {
                None
            };
            voxel_parts.push(voxel_miou(&pred, &gt, mask)?);
        }
    }

    let (Some(taxonomy), Some(counts)) = (taxonomy, counts) else {
        bail!("no samples given");
    };
    let mut rays = counts.report(&taxonomy);
    let mut raypq = if config.panoptic {
        Some(panoptic.report(thresholds, &taxonomy, config.iou_threshold)?)
    } else {
        None
    };
    let mut voxel = pool_voxel_miou(&voxel_parts);
    if args.per_sample_mean {
        average_samples(&mut rays, &per_sample_reports);
        if let Some(pq) = raypq.as_mut() {
            let live: Vec<_> = sample_pq.iter().filter(|r| !r.empty).collect();
            for (ti, t) in pq.per_threshold.iter_mut().enumerate() {
                t.pq = mean(live.iter().map(|r| r.per_threshold[ti].pq));
                t.sq = mean(live.iter().map(|r| r.per_threshold[ti].sq));
                t.rq = mean(live.iter().map(|r| r.per_threshold[ti].rq));
            }
            pq.raypq = mean(live.iter().map(|r| r.raypq));
        }
        if let Some(v) = voxel.as_mut() {
            v.miou = mean(voxel_parts.iter().map(|p| p.miou));
        }
    }
    Ok(EvalReport {
        rays,
        per_sample,
        raypq,
        voxel_miou: voxel,
        config: config.clone(),
    })
}

/// Evaluates every (pred, gt) pair, writes the JSON report to `--out` and returns it
/// with a printable table. An empty evaluation is not an error here; see
/// [`EvalReport::is_empty`].
pub fn cmd_eval(args: &EvalArgs) -> Result<EvalOutcome> {
    let config = resolve_config(args)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n);
    }
    let report = pool.build()?.install(|| evaluate(args, &config))?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    if let Some(out) = &args.out {
        fs::write(out, &json).with_context(|| format!("cannot write {}", out.display()))?;
    }
    let table = render_table(&report);
    Ok(EvalOutcome {
        report,
        json,
        table,
    })
}
